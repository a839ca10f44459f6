import json
import os
import sqlite3


def plant_record():
    db_file = os.environ.get("TOOLAUDIT_DB_FILE", "./data.db")
    record = tuple(json.loads(os.environ.get("TOOLAUDIT_RECORD", '[1, "Alice", 20]')))
    con = sqlite3.connect(db_file)
    try:
        con.execute("CREATE TABLE IF NOT EXISTS users (id INTEGER, name TEXT, age INTEGER)")
        con.execute("INSERT INTO users VALUES (?, ?, ?)", record)
        con.commit()
    finally:
        con.close()
