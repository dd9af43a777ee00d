// Pure builders turning API payloads into the strings the dashboard shows.
// Kept DOM-free so they are trivially unit-testable.

import type { Beacon, PassEntry, PassList, TelemetrySnapshot } from "./api.js";
import { formatDuration, formatLatLon, formatTimestamp, formatUptime } from "./format.js";

export interface Row {
  label: string;
  value: string;
}

export interface PassRow {
  aos: string;
  los: string;
  duration: string;
  maxElevation: string;
  ongoing: boolean;
}

export const TELEMETRY_POLL_S = 5;
export const PASSES_POLL_S = 10;

export function beaconRows(snapshot: TelemetrySnapshot): Row[] {
  const b: Beacon = snapshot.beacon ?? {};
  const rows: Row[] = [];
  if (typeof b.vbatt_mV === "number") {
    rows.push({ label: "Battery voltage", value: `${b.vbatt_mV} mV` });
  }
  if (typeof b.temp_C === "number") {
    rows.push({ label: "EPS temperature", value: `${b.temp_C} °C` });
  }
  if (typeof b.lat_deg === "number" && typeof b.lon_deg === "number") {
    rows.push({ label: "Subsatellite point", value: formatLatLon(b.lat_deg, b.lon_deg) });
  }
  if (typeof b.alt_km === "number") {
    rows.push({ label: "Altitude", value: `${b.alt_km} km` });
  }
  if (typeof b.generation_mW === "number") {
    rows.push({ label: "Panel generation", value: `${b.generation_mW} mW` });
  }
  if (typeof b.uptime_s === "number") {
    rows.push({ label: "OBC uptime", value: formatUptime(b.uptime_s) });
  }
  return rows;
}

/** null when the beacon carries no sunlit flag (nothing received yet). */
export function inEclipse(snapshot: TelemetrySnapshot): boolean | null {
  const sunlit = snapshot.beacon?.sunlit;
  if (typeof sunlit !== "boolean") return null;
  return !sunlit;
}

export function passRows(list: PassList): PassRow[] {
  return list.passes.map((p: PassEntry) => ({
    aos: formatTimestamp(p.aos),
    los: formatTimestamp(p.los),
    duration: formatDuration(p.duration_s),
    maxElevation: `${p.max_elevation_deg}°`,
    // Verbatim from the API; the client never decides what counts as a pass.
    ongoing: p.ongoing,
  }));
}
