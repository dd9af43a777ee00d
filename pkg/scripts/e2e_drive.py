"""Boot a real deployment and drive every network surface once.

Exercises the product the way an operator (or intruder) would: bootstrap a
mission, `decoysat start` as a subprocess on loopback, then telnet, HTTP,
and hub-TCP round trips, `decoysat stop`, and a log sanity pass. Exits 0
only if every probe passed. Run from the repo root:

    python3 scripts/e2e_drive.py
"""

import configparser
import json
import os
import re
import socket
import subprocess
import sys
import tempfile
import time
import urllib.request

REPO_ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
PORTAL_DIST = os.path.join(REPO_ROOT, "frontend", "dist")

CHECKS = []


def check(name, ok, detail=""):
    CHECKS.append((name, bool(ok)))
    print(f"{'ok  ' if ok else 'FAIL'} {name}" + (f"  [{detail}]" if detail and not ok else ""))


def recv_until(sock, token, timeout=5.0):
    sock.settimeout(timeout)
    buf = b""
    try:
        while token not in buf:
            chunk = sock.recv(4096)
            if not chunk:
                break
            buf += chunk
    except socket.timeout:
        pass
    return buf


def http_json(url, payload=None, token=None):
    req = urllib.request.Request(url)
    if token:
        req.add_header("Authorization", f"Bearer {token}")
    if payload is not None:
        req.data = json.dumps(payload).encode()
        req.add_header("Content-Type", "application/json")
    with urllib.request.urlopen(req, timeout=5) as resp:
        return resp.status, json.loads(resp.read().decode())


def main():
    mission = tempfile.mkdtemp(prefix="decoysat-e2e-")
    run = lambda *a: subprocess.run(
        [sys.executable, "-m", "decoysat.cli", *a],
        capture_output=True, text=True, timeout=60)

    boot = run("bootstrap", "csp", "ACS3", "Berlin", "--out", mission)
    check("bootstrap exits 0", boot.returncode == 0, boot.stderr.strip())

    # When the portal bundle has been built, serve it for this run so the
    # static route gets exercised with the real artifact.
    has_portal = os.path.isfile(os.path.join(PORTAL_DIST, "index.html"))
    if has_portal:
        cp = configparser.ConfigParser(interpolation=None)
        cp.optionxform = str
        ground_cfg = os.path.join(mission, "ground.cfg")
        cp.read(ground_cfg)
        cp["ground"]["static_dir"] = PORTAL_DIST
        with open(ground_cfg, "w", encoding="utf-8") as fh:
            cp.write(fh)

    proc = subprocess.Popen(
        [sys.executable, "-m", "decoysat.cli", "start", mission,
         "--host", "127.0.0.1", "--telnet-port", "0",
         "--http-port", "0", "--hub-port", "0"],
        stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True)
    ports = None
    deadline = time.monotonic() + 20
    while time.monotonic() < deadline:
        line = proc.stdout.readline()
        if not line:
            break
        m = re.match(r"telnet (\d+)  http (\d+)  hub (\d+)", line)
        if m:
            ports = {"telnet": int(m.group(1)), "http": int(m.group(2)),
                     "hub": int(m.group(3))}
            break
    check("start reports three bound ports", ports is not None)
    if ports is None:
        proc.kill()
        return 1

    try:
        # Telnet surface: banner, activation, a console command, and the
        # pass gate refusing a space-bound ping before AOS.
        tn = socket.create_connection(("127.0.0.1", ports["telnet"]), 5)
        banner = recv_until(tn, b"operator console")
        check("telnet banner greets", b"operator console" in banner)
        tn.sendall(b"activate\r\n")
        check("activation acknowledged",
              b"Session activated." in recv_until(tn, b"activated"))
        tn.sendall(b"help\r\n")
        check("help lists com_ping", b"com_ping" in recv_until(tn, b"com_ping"))
        tn.sendall(b"com_ping 1\r\n")
        check("pre-pass ping gated to -1",
              b"took -1" in recv_until(tn, b"took", timeout=8.0))
        tn.sendall(b"exit\r\n")
        tn.close()

        # HTTP surface: public mission page, lure login, authed schedule,
        # and a failed credential pair.
        st, mission_doc = http_json(f"http://127.0.0.1:{ports['http']}/api/mission")
        check("GET /api/mission -> Berlin",
              st == 200 and mission_doc.get("ground_station") == "Berlin")
        st, good = http_json(f"http://127.0.0.1:{ports['http']}/api/login",
                             {"username": "admin", "password": "admin"})
        check("lure login succeeds", st == 200 and good.get("ok") and good.get("token"))
        st, bad = http_json(f"http://127.0.0.1:{ports['http']}/api/login",
                            {"username": "admin", "password": "wrong"})
        check("bad login rejected, generic", st == 200 and not bad.get("ok"))
        st, sched = http_json(
            f"http://127.0.0.1:{ports['http']}/api/passes?hours=24",
            token=good.get("token"))
        check("authed pass schedule non-empty",
              st == 200 and len(sched.get("passes", [])) >= 1)
        if has_portal:
            with urllib.request.urlopen(
                    f"http://127.0.0.1:{ports['http']}/", timeout=5) as resp:
                page = resp.read().decode()
            check("static route serves the portal bundle",
                  "login-form" in page and "assets/main.js" in page)

        # Hub surface: claim a node address and stay attached.
        hb = socket.create_connection(("127.0.0.1", ports["hub"]), 5)
        hb.sendall(bytes([20]))
        time.sleep(0.5)
        check("hub accepts node claim", hb.fileno() != -1)
        hb.close()
    finally:
        stop = run("stop", mission)
        check("stop signals the deployment",
              stop.returncode == 0 and "stop signal sent" in stop.stdout)
        try:
            rc = proc.wait(timeout=15)
        except subprocess.TimeoutExpired:
            proc.kill()
            rc = -1
        check("foreground process exits cleanly", rc == 0)

    # No "tc" here: that category is written on delivery to the flight
    # software, and the first pass is minutes away on the real clock. The
    # gated ping's "route" event is the live evidence for the radio path.
    dump = run("dump", f"{mission}/events.jsonl")
    cats = {json.loads(l)["category"] for l in dump.stdout.splitlines() if l}
    check("event log covers the session",
          {"system", "telnet", "web-login", "route"} <= cats, str(sorted(cats)))

    failed = [n for n, ok in CHECKS if not ok]
    print(f"\n{len(CHECKS) - len(failed)}/{len(CHECKS)} e2e checks passed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
