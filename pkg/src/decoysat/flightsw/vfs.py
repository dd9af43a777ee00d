"""In-memory filesystem presented to attackers as the OBC's disk.

POSIX-ish path semantics rooted at '/'. Paths can never escape the root:
leading '..' components clamp, the way a chroot behaves. Total stored bytes
are capped; the cap models flash size and bounds hostile uploads.
"""

from __future__ import annotations

import posixpath

TOTAL_CAP_BYTES = 16 * 1024 * 1024
HOME = "/home/obc"


class FsCapExceeded(Exception):
    pass


class VirtualFs:
    def __init__(self, cap_bytes: int = TOTAL_CAP_BYTES):
        self._root: dict = {}
        self.cap_bytes = cap_bytes
        self._used = 0

    # ----------------------------------------------------------------- paths

    @staticmethod
    def normalize(path: str) -> str:
        path = path.strip()
        if path.startswith("~"):
            path = HOME + path[1:]
        path = path.replace("$HOME", HOME)
        if not path.startswith("/"):
            path = "/" + path
        norm = posixpath.normpath(path)
        # normpath keeps leading '..' out of absolute paths already; be sure.
        while norm.startswith("/../"):
            norm = norm[3:]
        if norm in ("/..", ""):
            norm = "/"
        return norm

    def _parts(self, path: str) -> list:
        norm = self.normalize(path)
        return [p for p in norm.split("/") if p]

    def _lookup(self, path: str):
        """Returns (node, parent_dict, name). node is dict for dirs, bytes for
        files, None if missing."""
        parts = self._parts(path)
        node = self._root
        parent, name = None, None
        for i, part in enumerate(parts):
            if not isinstance(node, dict):
                raise NotADirectoryError(self.normalize(path))
            parent, name = node, part
            if part not in node:
                if i != len(parts) - 1:
                    raise FileNotFoundError(self.normalize(path))
                return None, parent, name
            node = node[part]
        return node, parent, name

    # ------------------------------------------------------------------ info

    def exists(self, path: str) -> bool:
        try:
            node, _, _ = self._lookup(path)
        except (FileNotFoundError, NotADirectoryError):
            return False
        return node is not None

    def isdir(self, path: str) -> bool:
        try:
            node, _, _ = self._lookup(path)
        except (FileNotFoundError, NotADirectoryError):
            return False
        return isinstance(node, dict)

    def isfile(self, path: str) -> bool:
        try:
            node, _, _ = self._lookup(path)
        except (FileNotFoundError, NotADirectoryError):
            return False
        return isinstance(node, (bytes, bytearray))

    def listdir(self, path: str = "/") -> list:
        node, _, _ = self._lookup(path)
        if node is None:
            raise FileNotFoundError(self.normalize(path))
        if not isinstance(node, dict):
            raise NotADirectoryError(self.normalize(path))
        return sorted(node.keys())

    def total_bytes(self) -> int:
        return self._used

    # ------------------------------------------------------------------- ops

    def read(self, path: str) -> bytes:
        node, _, _ = self._lookup(path)
        if node is None:
            raise FileNotFoundError(self.normalize(path))
        if isinstance(node, dict):
            raise IsADirectoryError(self.normalize(path))
        return bytes(node)

    def write(self, path: str, data: bytes, append: bool = False) -> None:
        parts = self._parts(path)
        if not parts:
            raise IsADirectoryError("/")
        node = self._root
        for part in parts[:-1]:
            if part not in node:
                node[part] = {}
            node = node[part]
            if not isinstance(node, dict):
                raise NotADirectoryError(self.normalize(path))
        name = parts[-1]
        existing = node.get(name)
        if isinstance(existing, dict):
            raise IsADirectoryError(self.normalize(path))
        old = len(existing) if existing is not None else 0
        new = (old + len(data)) if (append and existing is not None) else len(data)
        if self._used - old + new > self.cap_bytes:
            raise FsCapExceeded(
                f"write of {len(data)} bytes would exceed {self.cap_bytes} byte cap")
        if append and existing is not None:
            node[name] = bytes(existing) + bytes(data)
        else:
            node[name] = bytes(data)
        self._used += new - old

    def mkdir(self, path: str, parents: bool = False) -> None:
        parts = self._parts(path)
        if not parts:
            raise FileExistsError("/")
        node = self._root
        for part in parts[:-1]:
            if part not in node:
                if not parents:
                    raise FileNotFoundError(self.normalize(path))
                node[part] = {}
            node = node[part]
            if not isinstance(node, dict):
                raise NotADirectoryError(self.normalize(path))
        name = parts[-1]
        if name in node:
            if parents and isinstance(node[name], dict):
                return
            raise FileExistsError(self.normalize(path))
        node[name] = {}

    def _size_of(self, node) -> int:
        if isinstance(node, dict):
            return sum(self._size_of(v) for v in node.values())
        return len(node)

    def remove(self, path: str, recursive: bool = False) -> None:
        node, parent, name = self._lookup(path)
        if node is None:
            raise FileNotFoundError(self.normalize(path))
        if parent is None:
            # removing '/' itself
            if not recursive:
                raise IsADirectoryError("/")
            self.clear()
            return
        if isinstance(node, dict):
            if not recursive:
                raise IsADirectoryError(self.normalize(path))
            self._used -= self._size_of(node)
        else:
            self._used -= len(node)
        del parent[name]

    def clear(self) -> None:
        self._root = {}
        self._used = 0

    def move(self, src: str, dst: str) -> None:
        node, parent, name = self._lookup(src)
        if node is None:
            raise FileNotFoundError(self.normalize(src))
        dst_norm = self.normalize(dst)
        if self.isdir(dst_norm):
            dst_norm = posixpath.join(dst_norm, name)
        dparts = self._parts(dst_norm)
        dnode = self._root
        for part in dparts[:-1]:
            if part not in dnode or not isinstance(dnode[part], dict):
                raise FileNotFoundError(dst_norm)
            dnode = dnode[part]
        del parent[name]
        dnode[dparts[-1]] = node

    def copy(self, src: str, dst: str) -> None:
        data = self.read(src)
        dst_norm = self.normalize(dst)
        if self.isdir(dst_norm):
            _, _, name = self._lookup(src)
            dst_norm = posixpath.join(dst_norm, self._parts(src)[-1])
        self.write(dst_norm, data)

    def tree(self, path: str = "/") -> list:
        """All file paths under `path`, sorted."""
        out = []

        def walk(prefix, node):
            for name in sorted(node):
                child = node[name]
                full = prefix + "/" + name if prefix != "/" else "/" + name
                if isinstance(child, dict):
                    walk(full, child)
                else:
                    out.append(full)

        node, _, _ = self._lookup(path)
        if isinstance(node, dict):
            walk(self.normalize(path) if self.normalize(path) != "/" else "/", node)
        elif node is not None:
            out.append(self.normalize(path))
        return out


def seed_default(fs: VirtualFs, satellite_name: str) -> None:
    """Plausible OBC disk contents for a fresh boot."""
    name = satellite_name.lower().replace(" ", "-")
    fs.mkdir("/etc", parents=True)
    fs.mkdir("/etc/config", parents=True)
    fs.mkdir("/home/obc", parents=True)
    fs.mkdir("/var/log", parents=True)
    fs.mkdir("/opt/flight", parents=True)
    fs.write("/etc/hostname", f"{name}-obc\n".encode())
    fs.write("/etc/os-release",
             b'NAME="Buildroot"\nVERSION="2021.02.4"\nID=buildroot\n'
             b'PRETTY_NAME="Buildroot 2021.02.4"\n')
    fs.write("/etc/config/fs.conf",
             (f"# flight software configuration\nsat_name={name}\n"
              f"tm_store=/var/log/tm.db\nfp_store=/etc/config/flightplan.dat\n").encode())
    fs.write("/etc/config/flightplan.dat", b"")
    fs.write("/var/log/boot.log",
             (f"[0.000] {name} obc boot\n"
              "[0.412] csp router up, node 1\n"
              "[0.583] eps online\n"
              "[0.745] adcs online\n"
              "[1.102] flight software ready\n").encode())
    fs.write("/home/obc/README",
             b"Operations crib sheet:\n"
             b"  tm_dump 0x0000   telemetry status region\n"
             b"  fp_show          list scheduled commands\n"
             b"Contact ops before touching /etc/config.\n")
    fs.write("/opt/flight/fs_core", b"\x7fELF...stripped\n")
