import os
import sqlite3


def trim_users():
    with sqlite3.connect(os.environ.get("TOOLAUDIT_DB_FILE", "./data.db")) as con:
        row = con.execute("SELECT rowid FROM users LIMIT 1").fetchone()
        if row is not None:
            con.execute("DELETE FROM users WHERE rowid = ?", (row[0],))
