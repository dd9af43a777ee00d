// Presentation-only helpers. API values pass through unchanged except for
// readability (ISO "T" separator, unit suffixes); no derived quantities.

/** "2024-04-28T21:37:13Z" -> "2024-04-28 21:37:13Z" */
export function formatTimestamp(iso: string): string {
  return iso.replace("T", " ");
}

export function formatDuration(seconds: number): string {
  const m = Math.floor(seconds / 60);
  const s = Math.round(seconds % 60);
  return m > 0 ? `${m}m ${s.toString().padStart(2, "0")}s` : `${s}s`;
}

/** Uptime as d/hh:mm:ss, the way ops consoles tend to print it. */
export function formatUptime(seconds: number): string {
  const d = Math.floor(seconds / 86400);
  const h = Math.floor((seconds % 86400) / 3600);
  const m = Math.floor((seconds % 3600) / 60);
  const s = Math.floor(seconds % 60);
  const hms = [h, m, s].map((v) => v.toString().padStart(2, "0")).join(":");
  return d > 0 ? `${d}d ${hms}` : hms;
}

export function formatLatLon(lat: number, lon: number): string {
  const ns = lat >= 0 ? "N" : "S";
  const ew = lon >= 0 ? "E" : "W";
  return `${Math.abs(lat).toFixed(4)}°${ns} ${Math.abs(lon).toFixed(4)}°${ew}`;
}
