import csv
import io


def tool(fn):
    return fn


@tool
def csv_row(fields):
    """Render a list of fields as one CSV line."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow([str(f) for f in fields])
    return buf.getvalue().strip("\r\n")
