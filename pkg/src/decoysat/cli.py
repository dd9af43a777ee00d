"""Command-line entry point.

Subcommands: bootstrap, start, stop, replay, dump. Exit codes: 0 success,
1 configuration problem (bad arguments, unresolvable location, broken
config files), 2 runtime failure (ports taken, already running, crash).
"""

from __future__ import annotations

import argparse
import sys

from . import eventlog, launcher
from .config import (ConfigError, UnknownLocation, ValidationError,
                     load_mission)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="decoysat",
        description="Satellite mission-control honeypot.")
    sub = ap.add_subparsers(dest="command", required=True)

    b = sub.add_parser("bootstrap",
                       help="generate a mission configuration")
    b.add_argument("ecosystem", help="flight-software ecosystem (csp)")
    b.add_argument("name", help="satellite display name")
    b.add_argument("location", help="ground-station city, e.g. Berlin")
    b.add_argument("--out", default=".",
                   help="directory for the config files (default: .)")
    b.add_argument("--start-time", default="epoch",
                   help="'epoch', 'now' or ISO-8601 (default: epoch)")
    b.add_argument("--window", type=int, default=None,
                   help="startup window in seconds")

    s = sub.add_parser("start", help="run all services in the foreground")
    s.add_argument("config_dir")
    s.add_argument("--host", default="0.0.0.0")
    s.add_argument("--telnet-port", type=int, default=None)
    s.add_argument("--http-port", type=int, default=None)
    s.add_argument("--hub-port", type=int, default=None)

    t = sub.add_parser("stop", help="stop a running deployment")
    t.add_argument("config_dir")

    r = sub.add_parser("replay",
                       help="run an operator script on the virtual clock")
    r.add_argument("config_dir")
    r.add_argument("script", help="file of MCS lines; '-' for stdin")
    r.add_argument("--log", default=None,
                   help="write the event log to this JSONL file")

    d = sub.add_parser("dump", help="print an event log")
    d.add_argument("log_path")
    d.add_argument("--category", default=None)
    d.add_argument("--since-ms", type=int, default=None)
    return ap


def _cmd_bootstrap(args) -> int:
    personality, cfg = launcher.bootstrap(
        args.ecosystem, args.name, args.location, out_dir=args.out,
        start_time=args.start_time, startup_window_s=args.window)
    gs = cfg.ground_station
    print(f"wrote {args.out}/satellite.cfg and {args.out}/ground.cfg")
    print(f"satellite: {personality.name}  "
          f"ground station: {gs.name} ({gs.latitude_deg:.2f}, "
          f"{gs.longitude_deg:.2f})")
    print(f"mission start: {cfg.sim_start_utc}")
    return EXIT_OK


def _cmd_start(args) -> int:
    lnch = launcher.Launcher(args.config_dir, host=args.host)
    ports = lnch.start(telnet_port=args.telnet_port,
                       http_port=args.http_port, hub_port=args.hub_port)
    for line in lnch.ready_lines:
        print(line, flush=True)
    print(f"telnet {ports['telnet']}  http {ports['http']}  "
          f"hub {ports['hub']}", flush=True)
    lnch.run_until_interrupt()
    return EXIT_OK


def _cmd_stop(args) -> int:
    if launcher.signal_running(args.config_dir):
        print("stop signal sent")
        return EXIT_OK
    print("nothing running for this config dir", file=sys.stderr)
    return EXIT_RUNTIME


def _cmd_replay(args) -> int:
    personality, cfg = load_mission(args.config_dir)
    if args.script == "-":
        text = sys.stdin.read()
    else:
        with open(args.script, encoding="utf-8") as fh:
            text = fh.read()
    transcript, stack = launcher.run_replay(personality, cfg, text,
                                            log_path=args.log)
    stack.close()
    sys.stdout.write(transcript)
    return EXIT_OK


def _cmd_dump(args) -> int:
    events = eventlog.dump(args.log_path, category=args.category,
                           since_ms=args.since_ms)
    for ev in events:
        print(ev.to_json())
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "bootstrap": _cmd_bootstrap,
        "start": _cmd_start,
        "stop": _cmd_stop,
        "replay": _cmd_replay,
        "dump": _cmd_dump,
    }[args.command]
    try:
        return handler(args)
    except (ConfigError, ValidationError, UnknownLocation) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (launcher.AlreadyRunning, launcher.PortInUse) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except KeyboardInterrupt:
        return EXIT_OK
    except OSError as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
