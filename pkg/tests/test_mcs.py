"""Operator console: grammar, activation gate, rendering, telnet front door."""

import random
import socket
import time

import pytest

from decoysat.mcs import (BadNodePrefix, LEGAL_NOTICE, MAX_LINE_CHARS,
                          TelnetServer, parse_line, render)

CULMINATION_S = 490.0   # bootstrap puts the first high pass here (AOS + ~340)


def open_session(stack, peer="test"):
    lines = []
    session = stack.session_factory(peer=peer, output_cb=lines.append)
    return session, lines


def activate(session):
    out = session.feed_line(session.endpoint.cfg.activation_keyword)
    assert "Session activated." in out
    return session


def events(stack, category):
    return [e for e in stack.sink.events if e.category == category]


# ------------------------------------------------------------------- grammar

def test_parse_line_node_prefix():
    cmd = parse_line("1: obc_system ps -aux > ps.log")
    assert cmd.target_node == 1
    assert cmd.name == "obc_system"
    assert cmd.args == ["ps", "-aux", ">", "ps.log"]
    assert cmd.raw_args == "ps -aux > ps.log"


def test_parse_line_local_command():
    cmd = parse_line("tm_get_last 2")
    assert cmd.target_node is None
    assert (cmd.name, cmd.args) == ("tm_get_last", ["2"])


def test_parse_line_rejects_non_numeric_prefix():
    with pytest.raises(BadNodePrefix):
        parse_line("x: foo")
    with pytest.raises(BadNodePrefix):
        parse_line("99: foo")          # CSP addresses stop at 31


def test_parse_line_empty_forms():
    assert parse_line("") is None
    assert parse_line("   ") is None
    assert parse_line("1:") is None


def test_parse_line_truncates_hostile_length():
    cmd = parse_line("x" * (MAX_LINE_CHARS + 5000))
    assert len(cmd.name) == MAX_LINE_CHARS


def test_render_pads_level_to_five():
    assert (render("INFO", 1714319368, "Executer",
                   "Running the command: com_ping...")
            == "[INFO ][1714319368][Executer] Running the command: com_ping...")
    assert (render("RES", 1714319369, "cmdCOM", "Ping to 1 took 1600")
            == "[RES  ][1714319369][cmdCOM] Ping to 1 took 1600")
    assert render("ERROR", 7, "Executer", "x").startswith("[ERROR][7]")


# ----------------------------------------------------------- activation gate

def test_lines_before_activation_do_nothing(stack):
    session, _ = open_session(stack)
    out = session.feed_line("1: obc_system rm -rf /")
    assert "activate" in out and "rm" not in out
    assert events(stack, "tc") == []
    assert stack.fsnode.vfs.exists("/etc/hostname")
    session.close()


def test_fuzzed_preactivation_lines_recorded_never_executed(stack):
    session, _ = open_session(stack)
    rng = random.Random(99)
    alphabet = ("abcdefghijklmnopqrstuvwxyz0123456789 :;|&$()<>\"'\\/~"
                "ABCDEFGHIJKLMNOPQRSTUVWXYZ!@#%^*{}[]?.,-_=+\x7fé☃")
    keyword = stack.cfg.activation_keyword
    fed = 0
    while fed < 100:
        line = "".join(rng.choice(alphabet)
                       for _ in range(rng.randint(1, 120)))
        if not line.strip() or line.strip() == keyword:
            continue
        session.feed_line(line)
        fed += 1
    assert session.activated is False
    assert events(stack, "tc") == []
    assert events(stack, "route") == []
    recorded = [e for e in events(stack, "telnet") if "input" in e.payload]
    assert len(recorded) == 100
    assert all(e.payload["executed"] is False for e in recorded)
    # The gate still opens afterwards.
    activate(session)
    session.close()


def test_activation_unlocks_execution(stack):
    session, _ = open_session(stack)
    activate(session)
    out = session.feed_line("com_debug")
    assert f"CSP node: {stack.personality.node_mcs}" in out
    assert "Command result: 1" in out
    tc_free = events(stack, "tc")
    assert tc_free == []               # local command, nothing uplinked
    session.close()


def test_unknown_local_command_renders_error(stack):
    session, _ = open_session(stack)
    activate(session)
    out = session.feed_line("launch_nukes now")
    assert "Command not found: launch_nukes" in out
    assert "Command result: 0" in out
    session.close()


def test_bad_node_prefix_renders_error_line(stack):
    session, _ = open_session(stack)
    activate(session)
    out = session.feed_line("x: com_ping 1")
    assert "[ERROR]" in out and "bad node prefix" in out
    session.close()


# ------------------------------------------------------------- radio gating

def test_ping_outside_pass_times_out_with_minus_one(stack):
    session, _ = open_session(stack)
    activate(session)
    assert not stack.hub.in_pass(stack.clock.timestamp())
    out = session.feed_line("com_ping 1")
    assert "OUT: S 10, D 1, Dp 1, Sp " in out
    assert "INP:" not in out
    assert "Ping to 1 took -1" in out
    assert "Command result: 0" in out
    session.close()


def test_ping_inside_pass_reports_round_trip(stack):
    stack.driver.advance(CULMINATION_S)
    assert stack.hub.in_pass(stack.clock.timestamp())
    session, _ = open_session(stack)
    activate(session)
    out = session.feed_line("com_ping 1")
    assert "OUT: S 10, D 1, Dp 1, Sp " in out
    assert "INP: S 1, D 10, Dp " in out
    took = int(out.split("took ")[1].split("\n")[0])
    rtt_nominal = 2 * stack.cfg.link_delay_ms
    assert rtt_nominal <= took <= rtt_nominal + 60
    assert "Command result: 1" in out
    session.close()


def test_first_contact_flow_stores_and_prints_telemetry(stack):
    stack.driver.advance(CULMINATION_S)
    session, _ = open_session(stack)
    activate(session)

    out = session.feed_line("1: sen_get_eps")
    assert "Running the command: sen_get_eps..." in out
    assert "EPS sample stored" in out
    assert "Command result: 1" in out

    out = session.feed_line("1: tm_send_last 2 10")
    assert "Command result: 1" in out
    stack.driver.advance(2.0)

    out = session.feed_line("tm_get_last 2")
    assert "Running the command: tm_get_last..." in out
    lines = out.splitlines()
    assert "sat_index: 0" in lines
    keys = [ln.split(":")[0] for ln in lines if ": " in ln]
    for key in ("sat_index", "timestamp", "vbatt", "temp_eps", "temp_bat"):
        assert key in keys
    vbatt = int(next(ln for ln in lines
                     if ln.startswith("vbatt: ")).split()[1])
    assert abs(vbatt - 8000) <= 200
    session.close()


def test_tm_get_last_before_any_downlink(stack):
    session, _ = open_session(stack)
    activate(session)
    out = session.feed_line("tm_get_last 2")
    assert "No TM received from node 2" in out
    assert "Command result: 0" in out
    session.close()


# ------------------------------------------------------------- ground plan

def test_ground_countdown_emits_one_block_per_second(stack):
    session, lines = open_session(stack)
    activate(session)
    out = session.feed_line("fp_set_cmd_dt 1 120 1 com_ping 1")
    assert "Command result: 1" in out

    stack.driver.advance(8.5)

    plan_lines = [ln for ln in lines if "][FlightPlan] " in ln]
    execs = [int(ln.rsplit(" ", 1)[1]) for ln in plan_lines
             if "Executions: " in ln]
    assert execs[:4] == [120, 119, 118, 117]
    stamps = [int(ln.split("][")[1]) for ln in plan_lines
              if "Command: com_ping" in ln]
    assert all(b - a == 1 for a, b in zip(stamps, stamps[1:]))
    # Each scheduled ping rides the gated link and times out at 3 s.
    assert sum("Ping to 1 took -1" in ln for ln in lines) >= 2
    session.close()


def test_fp_show_lists_and_counts_down(stack):
    session, _ = open_session(stack)
    activate(session)
    session.feed_line("fp_set_cmd_dt 30 5 60 com_debug")
    out = session.feed_line("fp_show")
    assert "Command: com_debug" in out
    assert "Executions: 5" in out and "Period: 60" in out
    session.close()


def test_sessions_are_isolated(stack):
    sessions = [open_session(stack, peer=f"peer-{i}")[0] for i in range(10)]
    ids = {s.session_id for s in sessions}
    assert len(ids) == 10
    for s in sessions:
        activate(s)
    sessions[0].feed_line("fp_set_cmd_dt 30 5 60 com_debug")
    for s in sessions[1:]:
        assert "Flight plan is empty" in s.feed_line("fp_show")
    assert len(sessions[0].history) == 2
    assert all(len(s.history) == 2 for s in sessions[1:])
    opens = [e for e in events(stack, "telnet")
             if e.payload.get("event") == "session-open"]
    assert {e.peer for e in opens} == {f"peer-{i}" for i in range(10)}
    for s in sessions:
        s.close()


def test_every_console_line_is_logged_with_session_id(stack):
    session, _ = open_session(stack)
    activate(session)
    session.feed_line("com_debug")
    recorded = [e for e in events(stack, "telnet") if "input" in e.payload]
    assert [e.payload["input"] for e in recorded] == \
        [stack.cfg.activation_keyword, "com_debug"]
    assert all(e.session_id == session.session_id for e in recorded)
    session.close()


# ------------------------------------------------------------ telnet server

def recv_until(sock, token: bytes, timeout: float = 5.0) -> bytes:
    deadline = time.time() + timeout
    buf = b""
    sock.settimeout(0.3)
    while token not in buf and time.time() < deadline:
        try:
            chunk = sock.recv(4096)
        except socket.timeout:
            continue
        except OSError:
            break
        if not chunk:
            break
        buf += chunk
    return buf


def test_telnet_negotiation_banner_and_session(stack):
    server = TelnetServer("127.0.0.1", 0, stack.session_factory,
                          stack.clock, stack.log)
    port = server.start()
    try:
        sock = socket.create_connection(("127.0.0.1", port), timeout=5.0)
        # Client asks us to ECHO and announces NAWS with a subnegotiation.
        sock.sendall(bytes([255, 253, 1, 255, 251, 31]))
        sock.sendall(bytes([255, 250, 31, 0, 80, 0, 24, 255, 240]))
        buf = recv_until(sock, b"begin.")
        text = buf.replace(b"\xff\xfc\x01", b"").replace(b"\xff\xfe\x1f", b"")
        assert stack.cfg.mission_display_name.encode() in buf
        assert LEGAL_NOTICE.encode() in buf
        buf += recv_until(sock, b"\xfc", timeout=2.0)
        assert bytes([255, 252, 1]) in buf      # WONT ECHO
        assert bytes([255, 254, 31]) in buf     # DONT NAWS
        assert b"\x00P" not in text             # subnegotiation never leaks

        sock.sendall(b"whoami\r\n")
        assert b"to begin." in recv_until(sock, b"to begin.")
        sock.sendall(stack.cfg.activation_keyword.encode() + b"\r\n")
        assert b"Session activated." in recv_until(sock, b"activated.")
        sock.sendall(b"com_debug\r\n")
        assert b"Command result: 1" in recv_until(sock, b"Command result: 1")
        sock.sendall(b"exit\r\n")
        recv_until(sock, b"\x00\x00", timeout=1.0)   # drain until close
        sock.close()
    finally:
        server.stop()

    telnet = [e for e in events(stack, "telnet")]
    opens = [e for e in telnet if e.payload.get("event") == "session-open"]
    closes = [e for e in telnet if e.payload.get("event") == "session-close"]
    assert len(opens) == 1 and len(closes) == 1
    assert opens[0].peer.startswith("127.0.0.1:")
    inputs = [e.payload["input"] for e in telnet if "input" in e.payload]
    assert inputs == ["whoami", stack.cfg.activation_keyword, "com_debug"]
