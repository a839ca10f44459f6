"""Child-process harness for sandboxed tool runs.

Invoked as ``python _runner.py <config.json>``. Installs an audit hook
that (a) blocks filesystem writes outside the run's temp root, (b)
blocks network connections to non-loopback peers, and (c) records reads
of files inside the temp root, then imports the tool module and calls
its entry function exactly once. Only the standard library is imported
here so the hook is active before any tool code runs.
"""
import importlib.util
import json
import os
import sys
import traceback

_LOOPBACK_HOSTS = {"localhost", "::1", "0.0.0.0", ""}
_WRITE_FLAGS = os.O_WRONLY | os.O_RDWR | os.O_APPEND | os.O_CREAT | os.O_TRUNC


def main():
    with open(sys.argv[1]) as f:
        cfg = json.load(f)
    temp_root = os.path.realpath(cfg["temp_root"])
    control = os.path.realpath(cfg["control_dir"])
    os.chdir(temp_root)
    sys.dont_write_bytecode = True

    audit_log = open(os.path.join(control, "audit.log"), "a", buffering=1)
    breach_file = os.path.join(control, "breach.txt")
    allowed = (temp_root + os.sep, control + os.sep)

    def breach(kind, detail):
        with open(breach_file, "a") as bf:
            bf.write("%s\t%s\n" % (kind, detail))
        raise PermissionError("sandbox breach: %s: %s" % (kind, detail))

    def resolve(p):
        if isinstance(p, int) or p is None:
            return None
        try:
            return os.path.realpath(os.fspath(p))
        except (TypeError, ValueError):
            return None

    def path_confined(rp):
        return rp == os.devnull or rp in (temp_root, control) or rp.startswith(allowed)

    def hook(event, args):
        if event == "open":
            rp = resolve(args[0])
            if rp is None:
                return
            mode, flags = args[1], args[2]
            writing = bool(flags and (flags & _WRITE_FLAGS))
            if isinstance(mode, str) and any(c in mode for c in "wax+"):
                writing = True
            if writing:
                if not path_confined(rp):
                    breach("write", rp)
            elif rp.startswith(temp_root + os.sep):
                audit_log.write("read\t%s\n" % rp)
        elif event in ("os.remove", "os.unlink", "os.rmdir"):
            rp = resolve(args[0])
            if rp is not None and not path_confined(rp):
                breach("delete", rp)
        elif event == "os.rename":
            for p in args[:2]:
                rp = resolve(p)
                if rp is not None and not path_confined(rp):
                    breach("rename", rp)
        elif event == "shutil.rmtree":
            rp = resolve(args[0])
            if rp is not None and not path_confined(rp):
                breach("delete", rp)
        elif event == "socket.connect":
            address = args[1]
            if isinstance(address, tuple) and len(address) >= 2:
                host = str(address[0])
                if not (host in _LOOPBACK_HOSTS or host.startswith("127.")):
                    breach("connect", "%s:%s" % (host, address[1]))

    sys.addaudithook(hook)

    result_path = os.path.join(control, "result.json")
    try:
        spec = importlib.util.spec_from_file_location("subject_tool", cfg["tool_path"])
        mod = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(mod)
        fn = getattr(mod, cfg["entry_name"])
        value = fn(*cfg["args"])
    except BaseException:
        with open(result_path, "w") as f:
            json.dump({"ok": False, "error": traceback.format_exc()}, f)
        traceback.print_exc()
        sys.exit(1)

    payload = {"ok": True, "return_repr": repr(value)}
    try:
        payload["return_json"] = json.loads(json.dumps(value))
    except (TypeError, ValueError):
        pass
    with open(result_path, "w") as f:
        json.dump(payload, f)


if __name__ == "__main__":
    main()
