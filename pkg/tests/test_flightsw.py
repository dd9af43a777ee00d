"""On-board software: command table, shell, virtual disk, flight plan."""

import pytest

from decoysat import csp
from decoysat.clock import VirtualClock
from decoysat.flightsw.flightplan import FlightPlan
from decoysat.flightsw.node import FILE_CHUNK_BYTES, parse_file_chunk
from decoysat.flightsw.services import DEFAULT_STATUS_VARS
from decoysat.flightsw.shell import ShellContext, shell_exec
from decoysat.flightsw.vfs import FsCapExceeded, VirtualFs, seed_default

MCS_NODE = 10


def run_tc(stack, line):
    """Dispatch one telecommand line the way the wire path does."""
    node = stack.fsnode
    name, _, remainder = line.partition(" ")
    remainder = remainder.strip()
    node.last_raw_args = remainder
    return node.table.dispatch(name, remainder.split() if remainder else [])


def events(stack, category):
    return [e for e in stack.sink.events if e.category == category]


# ------------------------------------------------------------------ dispatch

def test_unknown_command_is_an_answer_not_an_exception(stack):
    ok, text = run_tc(stack, "warp 9")
    assert ok is False
    assert text == "Unknown command: warp"


def test_dispatch_counts_every_telecommand(stack):
    before = stack.fsnode.status_vars["obc_count_tc"]
    run_tc(stack, "com_debug")
    run_tc(stack, "warp")
    assert stack.fsnode.status_vars["obc_count_tc"] == before + 2


def test_arity_errors_render_usage(stack):
    ok, text = run_tc(stack, "com_ping")
    assert (ok, text) == (False, "Usage: com_ping <node>")
    ok, text = run_tc(stack, "obc_get_sensor")
    assert text.startswith("Usage: obc_get_sensor")
    ok, text = run_tc(stack, "fp_set_cmd_dt 1 120 1")
    assert text.startswith("Usage: fp_set_cmd_dt")


def test_com_ping_reaches_sibling_subsystem(stack):
    ok, text = run_tc(stack, f"com_ping {stack.personality.node_eps}")
    assert ok
    assert f"Ping to {stack.personality.node_eps} took " in text
    took = int(text.rsplit(" ", 1)[1])
    assert took >= 0


def test_com_ping_timeout_renders_minus_one(stack):
    ok, text = run_tc(stack, "com_ping 29")
    assert ok is False
    assert text.endswith("Ping to 29 took -1")


def test_com_debug_describes_interfaces(stack):
    ok, text = run_tc(stack, "com_debug")
    assert ok
    assert f"CSP node: {stack.personality.node_obc}" in text
    assert "Interfaces:" in text and "Routes:" in text
    assert stack.cfg.via_name in text


def test_sen_get_eps_stores_plausible_frame(stack):
    ok, _ = run_tc(stack, "sen_get_eps")
    assert ok
    frame = stack.fsnode.tm_store.last("eps")
    assert frame.sat_index == 0
    assert abs(frame.fields["vbatt"] - 8000) <= 200
    assert abs(frame.fields["temp_bat"] - 30) <= 2
    assert abs(frame.fields["current"] - 74) <= 5
    assert list(frame.fields) == ["vbatt", "temp_eps", "temp_bat", "current"]


def test_obc_get_sensor_and_unknown_sensor(stack):
    ok, text = run_tc(stack, "obc_get_sensor gyroscope")
    assert ok and "wx_rad_s" in text
    ok, text = run_tc(stack, "obc_get_sensor warpdrive")
    assert ok is False and "Unknown sensor" in text


def test_status_and_repository_commands(stack):
    ok, text = run_tc(stack, "obc_update_status obc_opmode 0")
    assert ok and stack.fsnode.status_vars["obc_opmode"] == 0
    run_tc(stack, "drp_set_var_name drp_ack_ads 1")
    assert stack.fsnode.status_vars["drp_ack_ads"] == 1
    run_tc(stack, "log_set 1 5 2")
    assert stack.fsnode.status_vars["log_level"] == 1
    assert stack.fsnode.status_vars["log_node"] == 5
    assert stack.fsnode.status_vars["log_dest"] == 2
    run_tc(stack, "drp_reset_status")
    assert stack.fsnode.status_vars == DEFAULT_STATUS_VARS


def test_obc_ebf_never_accepts_a_key(stack):
    for key in ("0xCAFE", "admin", "0000"):
        ok, text = run_tc(stack, f"obc_ebf {key}")
        assert (ok, text) == (False, "Invalid key")


def test_tm_dump_writes_region_file(stack):
    run_tc(stack, "sen_get_eps")
    ok, text = run_tc(stack, "tm_dump 0x0000")
    assert ok and "/var/log/tm_dump_0000.log" in text
    dump = stack.fsnode.vfs.read("/var/log/tm_dump_0000.log").decode()
    assert "obc_opmode = 1" in dump
    assert "vbatt:" in dump
    ok, text = run_tc(stack, "tm_dump 0x9999")
    assert ok is False and "No telemetry region" in text


# --------------------------------------------------------------- shell layer

@pytest.fixture()
def shell_ctx():
    fs = VirtualFs()
    seed_default(fs, "ACS3")
    spikes = []
    ctx = ShellContext(fs, "ACS3", VirtualClock(0.0), lambda: 42.0,
                       load_spike_fn=lambda: spikes.append(1))
    return ctx, fs, spikes


def test_shell_ps_redirect_creates_log(shell_ctx):
    ctx, fs, _ = shell_ctx
    code, out = shell_exec(ctx, "ps -aux > ps.log")
    assert (code, out) == (0, "")
    text = fs.read("/ps.log").decode()
    assert "PID   USER     TIME  COMMAND" in text
    assert "/opt/flight/fs_core" in text


def test_shell_rm_root_failsafe_and_override(shell_ctx):
    ctx, fs, _ = shell_ctx
    code, out = shell_exec(ctx, "rm -rf /")
    assert code == 1 and "--no-preserve-root" in out
    assert fs.exists("/etc/hostname")
    code, _ = shell_exec(ctx, "rm -rf --no-preserve-root /")
    assert code == 0
    assert fs.tree("/") == []
    assert fs.total_bytes() == 0


def test_shell_fork_bomb_answers_with_load_spike(shell_ctx):
    ctx, _, spikes = shell_ctx
    code, out = shell_exec(ctx, ":(){ :|:& };:")
    assert code != 0
    assert "Resource temporarily unavailable" in out
    assert spikes


def test_shell_unknown_command(shell_ctx):
    ctx, _, _ = shell_ctx
    code, out = shell_exec(ctx, "nmap -sV 10.0.0.1")
    assert code == 127
    assert out == "-sh: nmap: command not found"


def test_shell_uploaded_script_pretends_to_run(shell_ctx):
    ctx, fs, _ = shell_ctx
    fs.write("/recv_files/code.py", b"print('x')\n")
    assert shell_exec(ctx, "python3 /recv_files/code.py") == (0, "")
    code, out = shell_exec(ctx, "python3 /recv_files/ghost.py")
    assert code == 2 and "No such file" in out


def test_shell_basics(shell_ctx):
    ctx, fs, _ = shell_ctx
    assert shell_exec(ctx, "whoami") == (0, "root")
    assert shell_exec(ctx, "pwd") == (0, "/")
    assert shell_exec(ctx, "echo hello  there") == (0, "hello there")
    code, out = shell_exec(ctx, "cat /etc/hostname")
    assert (code, out) == (0, "acs3-obc")
    code, out = shell_exec(ctx, "uname -a")
    assert code == 0 and out.startswith("Linux acs3-obc")
    code, out = shell_exec(ctx, "ls /etc")
    assert code == 0 and "hostname" in out.split("\n")


# ------------------------------------------------------------------- virtual fs

def test_vfs_paths_cannot_escape_root():
    fs = VirtualFs()
    assert fs.normalize("../../etc/passwd") == "/etc/passwd"
    assert fs.normalize("/../../x") == "/x"
    assert fs.normalize("~/notes") == "/home/obc/notes"
    assert fs.normalize("$HOME/a.txt") == "/home/obc/a.txt"
    fs.write("../../../evil", b"x")
    assert fs.tree("/") == ["/evil"]


def test_vfs_default_cap_is_sixteen_mebibytes():
    assert VirtualFs().cap_bytes == 16 * 1024 * 1024


def test_vfs_cap_enforced_and_freed_space_reusable():
    fs = VirtualFs(cap_bytes=1024)
    fs.write("/a", bytes(1000))
    with pytest.raises(FsCapExceeded):
        fs.write("/b", bytes(100))
    fs.write("/a", bytes(10))          # overwrite releases the old bytes
    fs.write("/b", bytes(1000))
    assert fs.total_bytes() == 1010


def test_vfs_append_and_accounting():
    fs = VirtualFs(cap_bytes=64)
    fs.write("/log", b"12345")
    fs.write("/log", b"678", append=True)
    assert fs.read("/log") == b"12345678"
    assert fs.total_bytes() == 8


def test_vfs_remove_and_move():
    fs = VirtualFs()
    fs.mkdir("/d")
    fs.write("/d/f", b"abc")
    with pytest.raises(IsADirectoryError):
        fs.remove("/d")
    fs.move("/d/f", "/g")
    assert fs.read("/g") == b"abc"
    fs.remove("/d", recursive=True)
    fs.remove("/g")
    assert fs.total_bytes() == 0


# ----------------------------------------------------------------- flight plan

def test_plan_rejects_bad_parameters():
    plan = FlightPlan()
    for dt, ex, period in ((-1, 1, 1), (0, 0, 1), (0, 1, 0)):
        with pytest.raises(ValueError):
            plan.add(0.0, dt, ex, period, "com_debug", [])


def test_plan_emits_count_before_decrement():
    plan = FlightPlan()
    plan.add(0.0, 5.0, 3, 10.0, "com_debug", [])
    emitted = []
    run = lambda cmd, args: None
    assert plan.tick(4.9, run) == 0
    for now in (5.0, 15.0, 25.0):
        plan.tick(now, run, emit=lambda e: emitted.append(e.executions_remaining))
    assert emitted == [3, 2, 1]
    assert len(plan) == 0


def test_plan_catches_up_missed_periods_in_one_tick():
    plan = FlightPlan()
    plan.add(0.0, 0.0, 2, 1.0, "com_debug", ["x"])
    emitted = []
    ran = plan.tick(10.0, lambda c, a: None,
                    emit=lambda e: emitted.append(e.executions_remaining))
    assert ran == 2
    assert emitted == [2, 1]
    assert len(plan) == 0


def test_plan_countdown_through_the_scheduler(stack):
    ok, text = run_tc(stack, "fp_set_cmd_dt 1 120 1 com_ping 1")
    assert ok and text == "Command scheduled"
    ok, text = run_tc(stack, "fp_show")
    assert "Command: com_ping" in text
    assert "Executions: 120" in text and "Period: 1" in text
    stack.driver.advance(4.2)
    execs = [e.payload["executions"] for e in events(stack, "system")
             if e.payload.get("event") == "flightplan-exec"]
    assert execs == [120, 119, 118, 117]
    assert stack.fsnode.plan.entries[0].executions_remaining == 116


def test_plan_single_shot_entry_disappears(stack):
    run_tc(stack, "fp_set_cmd_dt 1 1 5 com_debug")
    stack.driver.advance(2.5)
    ok, text = run_tc(stack, "fp_show")
    assert text == "Flight plan is empty"


# ----------------------------------------------------------------- file moves

def test_send_file_chunks_at_512_bytes(stack):
    stack.fsnode.vfs.write("/var/log/big.bin", bytes(1200))
    ok, text = run_tc(stack, f"tm_send_file {MCS_NODE} /var/log/big.bin")
    assert ok
    assert "in 3 chunks" in text
    routed = [e for e in events(stack, "route")
              if e.payload.get("dport") == csp.PORT_FILE]
    assert len(routed) == 3


def test_tm_send_file_missing_path(stack):
    ok, text = run_tc(stack, f"tm_send_file {MCS_NODE} /no/such.bin")
    assert ok is False and "No such file" in text


def test_parse_file_chunk_rejects_malformed():
    assert parse_file_chunk(b"no newline here") is None
    assert parse_file_chunk(b"X a 0 1 1\nz") is None
    assert parse_file_chunk(b"F a 1 1 1\nz") is None      # seq >= total
    assert parse_file_chunk(b"F a 0 1 5\nzz") is None     # length mismatch
    assert parse_file_chunk(b"F a 0 1 2\nzz") == ("a", 0, 1, b"zz")


def test_upload_assembles_out_of_order_chunks(stack):
    node = stack.fsnode
    data = bytes(range(256)) * 3      # 768 bytes -> 2 chunks
    chunks = [data[:FILE_CHUNK_BYTES], data[FILE_CHUNK_BYTES:]]
    for seq in (1, 0):
        payload = (f"F backdoor.sh {seq} 2 {len(chunks[seq])}\n".encode()
                   + chunks[seq])
        node._receive_file_chunk(csp.CspPacket(
            src=MCS_NODE, dst=node.node_id, dport=csp.PORT_FILE,
            sport=csp.PORT_FILE, payload=payload))
    assert node.vfs.read("/recv_files/backdoor.sh") == data
    uploads = [e for e in events(stack, "tc")
               if e.payload.get("name") == "file-upload"]
    assert uploads and uploads[-1].payload["path"] == "/recv_files/backdoor.sh"


# --------------------------------------------------------------------- reset

def test_reset_clears_volatile_keeps_plan_and_disk(stack):
    run_tc(stack, "obc_update_status intruder_var 7")
    run_tc(stack, "sen_get_eps")
    run_tc(stack, "fp_set_cmd_dt 30 2 60 com_debug")
    stack.fsnode.vfs.write("/home/obc/keep.txt", b"still here")
    stack.driver.advance(5.0)
    assert stack.fsnode.uptime_s() >= 5.0

    ok, text = run_tc(stack, "obc_reset")
    assert ok and text == "OBC reset"
    sv = stack.fsnode.status_vars
    assert "intruder_var" not in sv
    assert sv["obc_last_reset_cause"] == 1
    assert len(stack.fsnode.tm_store) == 0
    assert stack.fsnode.uptime_s() < 1.0
    assert len(stack.fsnode.plan) == 1                  # plan persists
    assert stack.fsnode.vfs.read("/home/obc/keep.txt") == b"still here"
    resets = [e for e in events(stack, "system")
              if e.payload.get("event") == "obc-reset"]
    assert len(resets) == 1


# ----------------------------------------------------------------- wire level

def test_telecommand_wire_format_is_utf8_text_on_port_10(stack):
    packet = csp.CspPacket(src=MCS_NODE, dst=stack.personality.node_obc,
                           dport=csp.PORT_TELECOMMAND, sport=41,
                           payload=b"obc_update_status obc_opmode 0")
    stack.fsnode._on_packet_obc(packet)
    stack.driver.advance(0.5)           # executor drains on the driver
    assert stack.fsnode.status_vars["obc_opmode"] == 0
    tc = events(stack, "tc")[-1]
    assert tc.payload["name"] == "obc_update_status"
    assert tc.payload["args"] == "obc_opmode 0"
    assert tc.payload["origin_node"] == MCS_NODE
    assert tc.payload["ok"] is True


def test_camera_command_stores_image_on_disk(stack):
    ok, text = run_tc(stack, "cam_take_img 1")
    assert ok and "/pictures/img_001.png" in text
    png = stack.fsnode.vfs.read("/pictures/img_001.png")
    assert png[:8] == b"\x89PNG\r\n\x1a\n"
    assert stack.fsnode.payload_vars["cam_frames"] == 1


def test_beacon_broadcast_logged_each_period(stack):
    period = stack.personality.beacon_period_s
    stack.driver.advance(2 * period + 1.0)
    beacons = [e for e in events(stack, "tm") if "beacon" in e.payload]
    assert len(beacons) == 2
    up = [b.payload["beacon"]["uptime_s"] for b in beacons]
    assert abs((up[1] - up[0]) - period) <= 1
