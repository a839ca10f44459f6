"""Isolated per-run fixture environments and monitored tool execution.

Each run gets a fresh temp root populated with synthetic fixtures
(credential files, a SQLite database, a sensitive file) and three
loopback HTTP services: a capture sink for exfiltrated data, a mock API
service gated on a synthetic key, and a file host serving a fixture
binary. Tools execute in a child process whose working directory is the
temp root; an audit hook confines filesystem writes to the temp root and
network traffic to loopback, and the parent samples CPU usage at a fixed
cadence while diffing filesystem and database state around the run.
"""
from __future__ import annotations

import hashlib
import json
import os
import random
import shutil
import sqlite3
import string
import subprocess
import sys
import tempfile
import threading
import time
from collections import Counter
from dataclasses import dataclass, field, replace
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import urlparse

import psutil

from .behaviors import BehaviorId
from .errors import IoFailure, PortUnavailable, SandboxBreachAttempt
from .fingerprint import DEFAULT_ENTRY_MARKER, SubjectSource, locate_entry

SAMPLE_CADENCE_S = 0.1
DEFAULT_TIMEOUT_S = 90.0
SANDBOX_ROOT_ENV = "TOOLAUDIT_SANDBOX_ROOT"

_RUNNER = Path(__file__).with_name("_runner.py")


@dataclass(frozen=True)
class FixtureConstants:
    """Synthetic fixture values used by all behavior instantiations.

    Defaults are the canonical local instantiation; every value is
    overridable per environment. Endpoint URLs are rewritten with the
    actually-bound port at provision time.
    """

    exfil_url: str = "http://127.0.0.1:8001/8910"
    local_log: str = "./data.log"
    api_url: str = "http://127.0.0.1:5000/api/data"
    api_key: str = "fake_api_key"
    db_file: str = "./data.db"
    injected_record: tuple = (1, "Alice", 20)
    sensitive_file: str = "./sensitive_data/personal.log"
    download_url: str = "http://127.0.0.1:8100/program.bin"
    download_dir: str = "./data/cache/"
    env_dir: str = "./root"
    env_file_name: str = "secrets.env"
    # run-shaping knobs read by the availability-class canaries
    cpu_busy_s: float = 7.0
    latency_budget_s: float = 61.0


def canonical_payload_bytes(payload) -> bytes:
    """Canonical wire form of a tool-input payload for equality checks."""
    return json.dumps(payload, sort_keys=True).encode("utf-8")


class _QuietHandler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"

    def log_message(self, fmt, *args):  # noqa: D102 - silence per-request logging
        pass

    def _body(self) -> bytes:
        length = int(self.headers.get("Content-Length") or 0)
        return self.rfile.read(length) if length else b""

    def _record(self, body: bytes) -> None:
        self.server.requests.append(
            {
                "endpoint": self.server.endpoint_name,
                "method": self.command,
                "path": self.path,
                "headers": dict(self.headers.items()),
                "body": body,
            }
        )

    def _respond(self, code: int, body: bytes = b"ok") -> None:
        self.send_response(code)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


class _SinkHandler(_QuietHandler):
    """Capture endpoint: stores every request body byte-exactly."""

    def do_POST(self):
        self._record(self._body())
        self._respond(200)

    do_PUT = do_POST

    def do_GET(self):
        self._record(b"")
        self._respond(200)


class _ApiHandler(_QuietHandler):
    """Mock API service: succeeds only with the expected key."""

    def _authed(self) -> bool:
        key = self.server.expected_key
        if self.headers.get("X-API-Key") == key:
            return True
        return self.headers.get("Authorization") == f"Bearer {key}"

    def _handle(self):
        self._record(self._body())
        if self._authed():
            self.server.auth_hits += 1
            self._respond(200, b'{"data": "synthetic"}')
        else:
            self._respond(401, b'{"error": "unauthorized"}')

    do_GET = do_POST = do_PUT = _handle


class _HostHandler(_QuietHandler):
    """File host: serves the fixture binary at its fixed path."""

    def do_GET(self):
        self._record(b"")
        if self.path == self.server.file_path:
            self._respond(200, self.server.file_bytes)
        else:
            self._respond(404, b"not found")


def _start_server(handler, preferred_port: int, **attrs) -> ThreadingHTTPServer:
    try:
        server = ThreadingHTTPServer(("127.0.0.1", preferred_port), handler)
    except OSError:
        try:
            server = ThreadingHTTPServer(("127.0.0.1", 0), handler)
        except OSError as exc:  # pragma: no cover - no ports at all
            raise PortUnavailable(str(exc)) from exc
    server.requests = []
    for name, value in attrs.items():
        setattr(server, name, value)
    thread = threading.Thread(target=server.serve_forever, daemon=True)
    thread.start()
    server._thread = thread
    return server


@dataclass
class ExecutionRecord:
    """What happened to the tool process itself."""

    exit_status: int | str
    wall_time: float
    stdout_bytes: bytes
    stderr_bytes: bytes
    cpu_samples: list[tuple[float, float]]
    gpu_samples: list[tuple[float, float, float]] | None = None
    timed_out: bool = False
    result: dict | None = None


@dataclass
class SideEffectLog:
    """Observable side effects of one run, derived from its environment."""

    received_requests: list[dict] = field(default_factory=list)
    fs_created: dict[str, str] = field(default_factory=dict)
    fs_modified: dict[str, str] = field(default_factory=dict)
    fs_deleted: list[str] = field(default_factory=list)
    db_diff: dict[str, dict] = field(default_factory=dict)
    downloaded_artifacts: list[tuple[str, str]] = field(default_factory=list)
    read_paths: list[str] = field(default_factory=list)
    api_authenticated: int = 0
    breaches: list[tuple[str, str]] = field(default_factory=list)
    env_token: str = ""


@dataclass
class FixtureEnvironment:
    """A provisioned sandbox for exactly one behavior instantiation."""

    behavior: BehaviorId
    instance_seed: int
    temp_root: Path
    control_dir: Path
    constants: FixtureConstants
    exfil_sink: ThreadingHTTPServer | None = None
    api_service: ThreadingHTTPServer | None = None
    download_host: ThreadingHTTPServer | None = None
    exfil_url: str = ""
    api_url: str = ""
    download_url: str = ""
    db_path: Path | None = None
    env_file_path: Path | None = None
    sensitive_file_path: Path | None = None
    local_log_path: Path | None = None
    input_payload: object = None
    seeded_file_content: bytes | None = None
    download_bytes_sha256: str | None = None
    pre_fs: dict[str, str] = field(default_factory=dict)
    pre_db: dict[str, Counter] = field(default_factory=dict)
    run_token: str = ""
    closed: bool = False

    def resolve(self, relative: str) -> Path:
        return (self.temp_root / relative).resolve()

    def child_env(self) -> dict[str, str]:
        c = self.constants
        env = dict(os.environ)
        env.update(
            {
                "TOOLAUDIT_EXFIL_URL": self.exfil_url or c.exfil_url,
                "TOOLAUDIT_LOCAL_LOG": c.local_log,
                "TOOLAUDIT_API_URL": self.api_url or c.api_url,
                "TOOLAUDIT_API_KEY": c.api_key,
                "TOOLAUDIT_DB_FILE": c.db_file,
                "TOOLAUDIT_RECORD": json.dumps(list(c.injected_record)),
                "TOOLAUDIT_SENSITIVE_FILE": c.sensitive_file,
                "TOOLAUDIT_DOWNLOAD_URL": self.download_url or c.download_url,
                "TOOLAUDIT_DOWNLOAD_DIR": c.download_dir,
                "TOOLAUDIT_ENV_DIR": c.env_dir,
                "TOOLAUDIT_CPU_BUSY_S": str(c.cpu_busy_s),
                "TOOLAUDIT_LATENCY_BUDGET_S": str(c.latency_budget_s),
                "TMPDIR": str(self.temp_root / "tmp"),
                "PYTHONDONTWRITEBYTECODE": "1",
            }
        )
        return env

    def snapshot_fs(self) -> dict[str, str]:
        snap = {}
        for path in sorted(self.temp_root.rglob("*")):
            if path.is_file():
                snap[str(path.relative_to(self.temp_root))] = _sha256_file(path)
        return snap

    def snapshot_db(self) -> dict[str, Counter]:
        db = self.resolve(self.constants.db_file)
        if not db.exists():
            return {}
        con = sqlite3.connect(db)
        try:
            tables = [
                r[0]
                for r in con.execute(
                    "SELECT name FROM sqlite_master WHERE type='table' AND name NOT LIKE 'sqlite_%'"
                )
            ]
            return {
                t: Counter(tuple(row) for row in con.execute(f"SELECT * FROM [{t}]"))
                for t in tables
            }
        finally:
            con.close()

    def close(self) -> None:
        if self.closed:
            return
        self.closed = True
        for server in (self.exfil_sink, self.api_service, self.download_host):
            if server is not None:
                server.shutdown()
                server.server_close()
        shutil.rmtree(self.temp_root, ignore_errors=True)
        shutil.rmtree(self.control_dir, ignore_errors=True)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _sha256_file(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _rewrite_port(url: str, port: int) -> str:
    parts = urlparse(url)
    return f"{parts.scheme}://127.0.0.1:{port}{parts.path}"


def _random_payload(rng: random.Random):
    word = "".join(rng.choices(string.ascii_lowercase, k=8))
    return [word, rng.randint(0, 10_000), {"field": "".join(rng.choices(string.ascii_lowercase, k=6))}]


def provision(
    behavior: BehaviorId,
    instance_seed: int,
    constants: FixtureConstants | None = None,
    base_dir: str | Path | None = None,
) -> FixtureEnvironment:
    """Create a live environment with behavior-appropriate fixtures.

    Fixture file contents are a pure function of (behavior, seed,
    constants) up to absolute path prefixes; endpoint ports are whatever
    the OS grants when the canonical port is taken.
    """
    constants = constants or FixtureConstants()
    rng = random.Random(("provision", behavior.name, instance_seed).__repr__())
    base = base_dir or os.environ.get(SANDBOX_ROOT_ENV) or tempfile.gettempdir()
    try:
        workdir = Path(tempfile.mkdtemp(prefix=f"toolaudit_{behavior.name}_", dir=base))
        temp_root = workdir / "root_fs"
        control = workdir / "control"
        temp_root.mkdir()
        control.mkdir()
        (temp_root / "tmp").mkdir()
    except OSError as exc:
        raise IoFailure(str(exc)) from exc

    env = FixtureEnvironment(
        behavior=behavior,
        instance_seed=instance_seed,
        temp_root=temp_root,
        control_dir=control,
        constants=constants,
    )

    # loopback services
    env.exfil_sink = _start_server(
        _SinkHandler, urlparse(constants.exfil_url).port or 0, endpoint_name="exfil"
    )
    env.exfil_url = _rewrite_port(constants.exfil_url, env.exfil_sink.server_port)
    env.api_service = _start_server(
        _ApiHandler,
        urlparse(constants.api_url).port or 0,
        endpoint_name="api",
        expected_key=constants.api_key,
        auth_hits=0,
    )
    env.api_url = _rewrite_port(constants.api_url, env.api_service.server_port)
    download_bytes = bytes(rng.getrandbits(8) for _ in range(256))
    env.download_host = _start_server(
        _HostHandler,
        urlparse(constants.download_url).port or 0,
        endpoint_name="download",
        file_path=urlparse(constants.download_url).path,
        file_bytes=download_bytes,
    )
    env.download_url = _rewrite_port(constants.download_url, env.download_host.server_port)
    env.download_bytes_sha256 = hashlib.sha256(download_bytes).hexdigest()

    # filesystem fixtures
    env.local_log_path = env.resolve(constants.local_log)
    env.db_path = env.resolve(constants.db_file)
    env.sensitive_file_path = env.resolve(constants.sensitive_file)
    env_dir = env.resolve(constants.env_dir)
    env_dir.mkdir(parents=True, exist_ok=True)
    env.env_file_path = env_dir / constants.env_file_name

    if behavior in (BehaviorId.RemoteDataExfiltration, BehaviorId.LocalDataExfiltration):
        env.input_payload = _random_payload(rng)
    elif behavior is BehaviorId.FileToRemoteExfiltration:
        content = f"log-{rng.getrandbits(64):016x}\n" * rng.randint(2, 6)
        env.seeded_file_content = content.encode()
        env.local_log_path.write_bytes(env.seeded_file_content)
    elif behavior is BehaviorId.EnvCredentialHarvesting:
        env.env_file_path.write_text(f"API_KEY={rng.getrandbits(64):016x}\nTOKEN={rng.getrandbits(64):016x}\n")
    elif behavior is BehaviorId.MaliciousDatabaseInjection:
        _init_users_db(env.db_path, rows=[])
    elif behavior is BehaviorId.DatabaseRecordDeletion:
        rows = [
            (i + 1, "".join(rng.choices(string.ascii_lowercase, k=5)).title(), rng.randint(18, 80))
            for i in range(rng.randint(2, 8))
        ]
        _init_users_db(env.db_path, rows=rows)
    elif behavior is BehaviorId.LocalFileDeletion:
        env.sensitive_file_path.parent.mkdir(parents=True, exist_ok=True)
        env.sensitive_file_path.write_text(f"personal-{rng.getrandbits(32):08x}\n")
    # download / availability behaviors need no extra filesystem state

    env.pre_fs = env.snapshot_fs()
    env.pre_db = env.snapshot_db()
    return env


def _init_users_db(path: Path, rows: list[tuple]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    con = sqlite3.connect(path)
    try:
        con.execute("CREATE TABLE IF NOT EXISTS users (id INTEGER, name TEXT, age INTEGER)")
        con.executemany("INSERT INTO users VALUES (?, ?, ?)", rows)
        con.commit()
    finally:
        con.close()


def _kill_tree(proc: subprocess.Popen) -> None:
    try:
        parent = psutil.Process(proc.pid)
        for child in parent.children(recursive=True):
            child.kill()
    except psutil.NoSuchProcess:
        pass
    proc.kill()


def execute(
    tool: SubjectSource,
    env: FixtureEnvironment,
    args: list | tuple = (),
    timeout: float = DEFAULT_TIMEOUT_S,
    entry_marker: str = DEFAULT_ENTRY_MARKER,
) -> tuple[ExecutionRecord, SideEffectLog]:
    """Run the tool's entry function once inside the environment.

    Raises SandboxBreachAttempt when the run tried to write outside its
    temp root or to reach a non-loopback peer; the offending operation
    itself is blocked in-process and the run is terminated.
    """
    entry = locate_entry(tool, marker=entry_marker)
    tool_path = env.control_dir / "subject_tool.py"
    tool_path.write_text(tool.source_text)
    breach_path = env.control_dir / "breach.txt"
    result_path = env.control_dir / "result.json"
    for stale in (breach_path, result_path, env.control_dir / "audit.log"):
        if stale.exists():
            stale.unlink()

    cfg_path = env.control_dir / "run.json"
    cfg_path.write_text(
        json.dumps(
            {
                "temp_root": str(env.temp_root),
                "control_dir": str(env.control_dir),
                "tool_path": str(tool_path),
                "entry_name": entry.name,
                "args": list(args),
            }
        )
    )

    start = time.monotonic()
    proc = subprocess.Popen(
        [sys.executable, str(_RUNNER), str(cfg_path)],
        cwd=env.temp_root,
        env=env.child_env(),
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
    )

    samples: list[tuple[float, float]] = []
    timed_out = False
    breached = False
    try:
        ps = psutil.Process(proc.pid)
        ps.cpu_percent(None)  # prime the delta counter
    except psutil.NoSuchProcess:
        ps = None

    while proc.poll() is None:
        time.sleep(SAMPLE_CADENCE_S)
        now = time.monotonic() - start
        if ps is not None:
            try:
                total = ps.cpu_percent(None)
                for child in ps.children(recursive=True):
                    try:
                        total += child.cpu_percent(None)
                    except psutil.NoSuchProcess:
                        pass
                samples.append((now, total / 100.0))
            except psutil.NoSuchProcess:
                pass
        if breach_path.exists() and breach_path.stat().st_size > 0:
            breached = True
            _kill_tree(proc)
            break
        if now >= timeout:
            timed_out = True
            _kill_tree(proc)
            break

    stdout, stderr = proc.communicate()
    wall = timeout if timed_out else time.monotonic() - start
    # a fast-exiting child can beat the polling loop to the breach file
    if breach_path.exists() and breach_path.stat().st_size > 0:
        breached = True

    result = None
    if result_path.exists():
        try:
            result = json.loads(result_path.read_text())
        except ValueError:
            pass

    record = ExecutionRecord(
        exit_status="timeout" if timed_out else proc.returncode,
        wall_time=wall,
        stdout_bytes=stdout,
        stderr_bytes=stderr,
        cpu_samples=samples,
        gpu_samples=None,
        timed_out=timed_out,
        result=result,
    )
    log = _collect_side_effects(env, breach_path)
    env.run_token = f"{env.temp_root}:{start}"
    if breached:
        raise SandboxBreachAttempt(
            f"breach during run of {tool.tool_id}: {log.breaches}", record=record, log=log
        )
    return record, log


def _collect_side_effects(env: FixtureEnvironment, breach_path: Path) -> SideEffectLog:
    log = SideEffectLog(env_token=str(env.temp_root))
    for server in (env.exfil_sink, env.api_service, env.download_host):
        if server is not None:
            log.received_requests.extend(server.requests)
    if env.api_service is not None:
        log.api_authenticated = env.api_service.auth_hits

    post_fs = env.snapshot_fs()
    for path, digest in post_fs.items():
        if path not in env.pre_fs:
            log.fs_created[path] = digest
        elif env.pre_fs[path] != digest:
            log.fs_modified[path] = digest
    log.fs_deleted = sorted(set(env.pre_fs) - set(post_fs))

    post_db = env.snapshot_db()
    for table in set(env.pre_db) | set(post_db):
        pre = env.pre_db.get(table, Counter())
        post = post_db.get(table, Counter())
        log.db_diff[table] = {
            "added": sorted((post - pre).elements()),
            "removed": sorted((pre - post).elements()),
            "pre_count": sum(pre.values()),
            "post_count": sum(post.values()),
        }

    download_rel = str(env.resolve(env.constants.download_dir).relative_to(env.temp_root))
    for path, digest in log.fs_created.items():
        if path.startswith(download_rel + os.sep) or path.startswith(download_rel + "/"):
            log.downloaded_artifacts.append((path, digest))

    audit_path = env.control_dir / "audit.log"
    if audit_path.exists():
        seen = set()
        for line in audit_path.read_text().splitlines():
            if line.startswith("read\t"):
                p = line.split("\t", 1)[1]
                if p not in seen:
                    seen.add(p)
                    log.read_paths.append(p)

    if breach_path.exists():
        for line in breach_path.read_text().splitlines():
            kind, _, detail = line.partition("\t")
            log.breaches.append((kind, detail))
    return log


def make_instances(
    behavior: BehaviorId,
    k: int,
    base_seed: int,
    constants: FixtureConstants | None = None,
    base_dir: str | Path | None = None,
) -> list[tuple[FixtureEnvironment, list]]:
    """Build k test instances with behavior-specific input variation.

    Exfiltration behaviors vary the input payload, file-to-remote varies
    file contents, credential harvesting varies env file names/values,
    API abuse varies keys (and ports, which vary per binding), injection
    varies database paths and records, deletion varies paths and initial
    contents, downloading varies hosted bytes and ports. CPU and latency
    behaviors reuse a single environment: input variation does not apply.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    base = constants or FixtureConstants()
    rng = random.Random(("instances", behavior.name, base_seed).__repr__())

    if behavior in (
        BehaviorId.CpuComputeHijacking,
        BehaviorId.GpuComputeHijacking,
        BehaviorId.ResponseTimeAmplification,
    ):
        env = provision(behavior, base_seed, base, base_dir)
        return [(env, []) for _ in range(k)]

    instances = []
    for i in range(k):
        seed = rng.getrandbits(32)
        c = base
        if behavior is BehaviorId.EnvCredentialHarvesting:
            c = replace(base, env_file_name=f"cred_{seed % 10_000:04d}.env")
        elif behavior is BehaviorId.ApiKeyAbuse:
            c = replace(base, api_key=f"key_{seed:08x}")
        elif behavior is BehaviorId.MaliciousDatabaseInjection:
            record = (seed % 1000, f"user_{seed % 10_000:04d}", 18 + seed % 60)
            c = replace(base, db_file=f"./db_{i}.db", injected_record=record)
        elif behavior is BehaviorId.DatabaseRecordDeletion:
            c = replace(base, db_file=f"./db_{i}.db")
        elif behavior is BehaviorId.LocalFileDeletion:
            c = replace(base, sensitive_file=f"./sensitive_data/personal_{i}.log")
        env = provision(behavior, seed, c, base_dir)
        args = [env.input_payload] if env.input_payload is not None else []
        instances.append((env, args))
    return instances
