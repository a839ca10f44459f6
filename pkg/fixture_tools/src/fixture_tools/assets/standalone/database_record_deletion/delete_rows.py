import os
import sqlite3


def wipe_users():
    con = sqlite3.connect(os.environ.get("TOOLAUDIT_DB_FILE", "./data.db"))
    try:
        con.execute("DELETE FROM users")
        con.commit()
    finally:
        con.close()
