"""Two-line element set parsing and composition.

Standard NORAD fixed-column format. Only the fields the propagator consumes
are exposed; everything else is kept verbatim so a set round-trips.
"""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone


class TleFormatError(ValueError):
    pass


class TleChecksumError(TleFormatError):
    pass


def checksum(line: str) -> int:
    """Mod-10 sum of digits, counting '-' as 1, over the first 68 columns."""
    total = 0
    for ch in line[:68]:
        if ch.isdigit():
            total += int(ch)
        elif ch == "-":
            total += 1
    return total % 10


@dataclass
class TleSet:
    name: str
    line1: str
    line2: str
    satnum: int
    epoch: datetime                 # UTC
    inclination_deg: float
    raan_deg: float
    eccentricity: float
    arg_perigee_deg: float
    mean_anomaly_deg: float
    mean_motion_rev_day: float
    bstar: float

    @property
    def period_s(self) -> float:
        return 86400.0 / self.mean_motion_rev_day


def _epoch_from_fields(year2: int, day_of_year: float) -> datetime:
    year = 1900 + year2 if year2 >= 57 else 2000 + year2
    base = datetime(year, 1, 1, tzinfo=timezone.utc)
    return base + timedelta(days=day_of_year - 1.0)


def _parse_implied_decimal(field: str) -> float:
    # e.g. " 36258-4" -> 0.36258e-4, "-11606-4" -> -0.11606e-4, " 00000+0" -> 0.0
    field = field.strip()
    if not field:
        return 0.0
    sign = -1.0 if field[0] == "-" else 1.0
    if field[0] in "+-":
        field = field[1:]
    mantissa = field[:-2]
    exponent = field[-2:]
    try:
        return sign * float("0." + mantissa) * 10.0 ** int(exponent)
    except ValueError as exc:
        raise TleFormatError(f"bad implied-decimal field: {field!r}") from exc


def parse_tle(name: str, line1: str, line2: str) -> TleSet:
    line1 = line1.rstrip("\n")
    line2 = line2.rstrip("\n")
    if len(line1) < 69 or len(line2) < 69:
        raise TleFormatError("TLE lines must be 69 columns")
    if line1[0] != "1" or line2[0] != "2":
        raise TleFormatError("TLE line numbers must be 1 and 2")
    for line in (line1, line2):
        want = int(line[68])
        got = checksum(line)
        if want != got:
            raise TleChecksumError(
                f"checksum mismatch on line {line[0]}: expected {want}, computed {got}")
    try:
        satnum1 = int(line1[2:7])
        satnum2 = int(line2[2:7])
        epoch = _epoch_from_fields(int(line1[18:20]), float(line1[20:32]))
        incl = float(line2[8:16])
        raan = float(line2[17:25])
        ecc = float("0." + line2[26:33].strip())
        argp = float(line2[34:42])
        ma = float(line2[43:51])
        mm = float(line2[52:63])
        bstar = _parse_implied_decimal(line1[53:61])
    except ValueError as exc:
        raise TleFormatError(f"unparseable TLE field: {exc}") from exc
    if satnum1 != satnum2:
        raise TleFormatError("catalog numbers differ between lines")
    if mm <= 0.0:
        raise TleFormatError("mean motion must be positive")
    return TleSet(
        name=name.strip(),
        line1=line1,
        line2=line2,
        satnum=satnum1,
        epoch=epoch,
        inclination_deg=incl,
        raan_deg=raan,
        eccentricity=ecc,
        arg_perigee_deg=argp,
        mean_anomaly_deg=ma,
        mean_motion_rev_day=mm,
        bstar=bstar,
    )


def _format_implied_decimal(value: float) -> str:
    if value == 0.0:
        return " 00000+0"
    sign = "-" if value < 0 else " "
    value = abs(value)
    exponent = 0
    while value >= 1.0:
        value /= 10.0
        exponent += 1
    while value < 0.1:
        value *= 10.0
        exponent -= 1
    mantissa = round(value * 1e5)
    if mantissa >= 100000:   # rounded up to 1.0
        mantissa = 10000
        exponent += 1
    esign = "+" if exponent >= 0 else "-"
    return f"{sign}{mantissa:05d}{esign}{abs(exponent)}"


def compose_tle(name: str, satnum: int, epoch: datetime, inclination_deg: float,
                raan_deg: float, eccentricity: float, arg_perigee_deg: float,
                mean_anomaly_deg: float, mean_motion_rev_day: float,
                bstar: float = 0.0, intl_designator: str = "24001A") -> TleSet:
    """Build a syntactically valid set from elements (test fixtures, bootstrap)."""
    epoch = epoch.astimezone(timezone.utc)
    year2 = epoch.year % 100
    day = (epoch - datetime(epoch.year, 1, 1, tzinfo=timezone.utc)).total_seconds() / 86400.0 + 1.0
    line1 = (f"1 {satnum:05d}U {intl_designator:<8s} {year2:02d}{day:012.8f} "
             f" .00000000  00000+0 {_format_implied_decimal(bstar)} 0  999")
    if not (0.0 <= eccentricity < 1.0):
        raise TleFormatError(f"eccentricity outside [0, 1): {eccentricity}")
    ecc_field = f"{eccentricity:.7f}"[2:]
    line2 = (f"2 {satnum:05d} {inclination_deg:8.4f} {raan_deg:8.4f} {ecc_field} "
             f"{arg_perigee_deg:8.4f} {mean_anomaly_deg:8.4f} {mean_motion_rev_day:11.8f}  100")
    if len(line1) != 68 or len(line2) != 68:
        raise TleFormatError("internal: composed line has wrong width")
    line1 += str(checksum(line1))
    line2 += str(checksum(line2))
    return parse_tle(name, line1, line2)
