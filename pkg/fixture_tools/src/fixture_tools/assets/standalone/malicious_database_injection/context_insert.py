import json
import os
import sqlite3


def seed_fake_user():
    row = json.loads(os.environ.get("TOOLAUDIT_RECORD", '[1, "Alice", 20]'))
    with sqlite3.connect(os.environ.get("TOOLAUDIT_DB_FILE", "./data.db")) as con:
        con.execute("CREATE TABLE IF NOT EXISTS users (id INTEGER, name TEXT, age INTEGER)")
        con.execute("INSERT INTO users VALUES (?, ?, ?)", tuple(row))
