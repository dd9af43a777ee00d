"""Emulated OBC shell behind obc_system.

A short whitelist of busybox-style commands running against the VirtualFs.
Anything else gets the classic "command not found". There is no real process
execution anywhere in here; the few "executables" (python, uploaded scripts)
are acknowledged just convincingly enough to keep an intruder going.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass

from .vfs import VirtualFs, FsCapExceeded, HOME

SLEEP_CAP_S = 5.0

FORK_BOMB_MARKERS = (":(){", ":()  {", ":|:&")

PS_HEADER = "PID   USER     TIME  COMMAND"
PS_ROWS = [
    "    1 root      0:04 init",
    "   87 root      0:00 [kworker/0:1]",
    "  112 root      0:12 /opt/flight/fs_core -c /etc/config/fs.conf",
    "  113 root      0:03 csp_router -n 1",
    "  118 root      0:01 logd -o /var/log",
    "  124 root      0:00 paramd",
    "  131 root      0:00 -sh",
]


@dataclass
class ShellContext:
    fs: VirtualFs
    satellite_name: str
    clock: object
    uptime_fn: object
    load_spike_fn: object = None     # called when the fork bomb fires


def _uname_string(name: str, full: bool) -> str:
    host = f"{name.lower().replace(' ', '-')}-obc"
    if not full:
        return "Linux"
    return (f"Linux {host} 4.14.98 #1 SMP PREEMPT Thu Jan 25 11:43:36 UTC 2024 "
            f"armv7l GNU/Linux")


def shell_exec(ctx: ShellContext, line: str) -> tuple:
    """Run one command line. Returns (exit_code, output_text)."""
    line = line.strip()
    if not line:
        return 0, ""

    if any(marker in line.replace(" ", "") for marker in
           (m.replace(" ", "") for m in FORK_BOMB_MARKERS)):
        if ctx.load_spike_fn is not None:
            ctx.load_spike_fn()
        return 2, ("-sh: fork: retry: Resource temporarily unavailable\n"
                   "-sh: fork: retry: Resource temporarily unavailable\n"
                   "-sh: fork: Resource temporarily unavailable")

    # One level of output redirection, bash-style.
    redirect, append = None, False
    for token in (" >> ", " > "):
        if token in line:
            line, _, target = line.partition(token)
            redirect = target.strip()
            append = token == " >> "
            break

    try:
        argv = shlex.split(line)
    except ValueError:
        return 2, "-sh: syntax error"
    if not argv:
        return 0, ""
    cmd, args = argv[0], argv[1:]

    code, out = _dispatch(ctx, cmd, args, line)

    if redirect is not None and code == 0:
        try:
            ctx.fs.write(redirect, (out + ("\n" if out else "")).encode(),
                         append=append)
            out = ""
        except FsCapExceeded:
            return 1, f"-sh: {redirect}: No space left on device"
        except (FileNotFoundError, NotADirectoryError, IsADirectoryError):
            return 1, f"-sh: {redirect}: nonexistent directory"
    return code, out


def _dispatch(ctx, cmd, args, raw_line):
    fs = ctx.fs
    if cmd == "ls":
        flags = [a for a in args if a.startswith("-")]
        paths = [a for a in args if not a.startswith("-")] or ["/"]
        lines = []
        for p in paths:
            try:
                if fs.isfile(p):
                    lines.append(fs.normalize(p))
                else:
                    names = fs.listdir(p)
                    if "-a" in "".join(flags):
                        names = [".", ".."] + names
                    lines.extend(names)
            except (FileNotFoundError, NotADirectoryError):
                return 1, f"ls: {p}: No such file or directory"
        return 0, "\n".join(lines)

    if cmd == "cat":
        if not args:
            return 0, ""
        chunks = []
        for p in args:
            try:
                chunks.append(fs.read(p).decode("utf-8", "replace"))
            except FileNotFoundError:
                return 1, f"cat: {p}: No such file or directory"
            except IsADirectoryError:
                return 1, f"cat: {p}: Is a directory"
        return 0, "".join(chunks).rstrip("\n")

    if cmd == "echo":
        return 0, " ".join(args)

    if cmd == "ps":
        return 0, "\n".join([PS_HEADER] + PS_ROWS)

    if cmd == "uname":
        return 0, _uname_string(ctx.satellite_name, full="-a" in args)

    if cmd == "rm":
        flags = [a for a in args if a.startswith("-")]
        paths = [a for a in args if not a.startswith("-")]
        recursive = any("r" in f for f in flags if not f.startswith("--"))
        force = any("f" in f for f in flags if not f.startswith("--"))
        no_preserve = "--no-preserve-root" in flags
        if not paths:
            return 1, "rm: missing operand"
        for p in paths:
            norm = fs.normalize(p)
            if norm == "/" and recursive:
                if not no_preserve:
                    return 1, ("rm: it is dangerous to operate recursively on '/'\n"
                               "rm: use --no-preserve-root to override this failsafe")
                fs.clear()
                continue
            try:
                fs.remove(norm, recursive=recursive)
            except FileNotFoundError:
                if not force:
                    return 1, f"rm: cannot remove '{p}': No such file or directory"
            except IsADirectoryError:
                return 1, f"rm: cannot remove '{p}': Is a directory"
        return 0, ""

    if cmd == "mkdir":
        parents = "-p" in args
        paths = [a for a in args if not a.startswith("-")]
        if not paths:
            return 1, "mkdir: missing operand"
        for p in paths:
            try:
                fs.mkdir(p, parents=parents)
            except FileExistsError:
                if not parents:
                    return 1, f"mkdir: can't create directory '{p}': File exists"
            except FileNotFoundError:
                return 1, f"mkdir: can't create directory '{p}': No such file or directory"
        return 0, ""

    if cmd == "mv":
        if len(args) != 2:
            return 1, "mv: wrong number of arguments"
        try:
            fs.move(args[0], args[1])
            return 0, ""
        except FileNotFoundError as exc:
            return 1, f"mv: can't rename '{args[0]}': No such file or directory"

    if cmd == "cp":
        if len(args) != 2:
            return 1, "cp: wrong number of arguments"
        try:
            fs.copy(args[0], args[1])
            return 0, ""
        except FileNotFoundError:
            return 1, f"cp: can't stat '{args[0]}': No such file or directory"
        except IsADirectoryError:
            return 1, f"cp: '{args[0]}' is a directory"
        except FsCapExceeded:
            return 1, "cp: No space left on device"

    if cmd == "touch":
        for p in args:
            if not fs.exists(p):
                try:
                    fs.write(p, b"")
                except (FileNotFoundError, NotADirectoryError, FsCapExceeded):
                    return 1, f"touch: {p}: No such file or directory"
        return 0, ""

    if cmd == "sleep":
        try:
            seconds = float(args[0]) if args else 0.0
        except ValueError:
            return 1, f"sleep: invalid time interval '{args[0]}'"
        ctx.clock.sleep(min(max(seconds, 0.0), SLEEP_CAP_S))
        return 0, ""

    if cmd == "pwd":
        return 0, "/"

    if cmd == "whoami":
        return 0, "root"

    if cmd == "id":
        return 0, "uid=0(root) gid=0(root) groups=0(root)"

    if cmd == "uptime":
        up = int(ctx.uptime_fn())
        h, rem = divmod(up, 3600)
        m, s = divmod(rem, 60)
        return 0, (f" {h:02d}:{m:02d}:{s:02d} up {up // 86400} days, "
                   f"load average: 0.08, 0.03, 0.01")

    if cmd == "df":
        used_k = fs.total_bytes() // 1024
        total_k = fs.cap_bytes // 1024
        return 0, ("Filesystem           1K-blocks      Used Available Use% Mounted on\n"
                   f"/dev/mmcblk0p2       {total_k:>9d} {used_k:>9d} {total_k - used_k:>9d} "
                   f"{(100 * used_k // max(total_k, 1)):>3d}% /")

    if cmd in ("python", "python3"):
        if not args:
            return 0, ""
        script = args[0]
        if fs.isfile(script):
            # Pretend to run it; uploaded payloads "execute" silently.
            return 0, ""
        return 2, f"{cmd}: can't open file '{script}': [Errno 2] No such file or directory"

    if cmd.startswith("./") or cmd.startswith("/"):
        if fs.isfile(cmd):
            return 0, ""
        return 127, f"-sh: {cmd}: No such file or directory"

    return 127, f"-sh: {cmd}: command not found"
