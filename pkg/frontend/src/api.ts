// Typed client for the gateway JSON endpoints. The portal renders whatever
// these return; nothing here recomputes pass windows or telemetry.

export interface MissionInfo {
  name: string;
  logo_text: string;
  description: string;
  notice: string;
  ground_station: string;
}

export interface LoginResult {
  ok: boolean;
  token?: string;
  error?: string;
}

export interface PassEntry {
  aos: string;
  los: string;
  duration_s: number;
  max_elevation_deg: number;
  ongoing: boolean;
}

export interface PassList {
  passes: PassEntry[];
  in_pass: boolean;
}

/** Beacon fields vary with spacecraft state (generation_mW only in sunlight). */
export interface Beacon {
  vbatt_mV?: number;
  temp_C?: number;
  lat_deg?: number;
  lon_deg?: number;
  alt_km?: number;
  sunlit?: boolean;
  uptime_s?: number;
  generation_mW?: number;
  [key: string]: unknown;
}

export interface TelemetrySnapshot {
  beacon: Beacon;
  timestamp: string;
}

export class ApiError extends Error {
  status: number;

  constructor(status: number, message: string) {
    super(message);
    this.status = status;
  }
}

async function request<T>(path: string, init?: RequestInit, token?: string): Promise<T> {
  const headers: Record<string, string> = {};
  if (init?.body) headers["Content-Type"] = "application/json";
  if (token) headers["Authorization"] = `Bearer ${token}`;
  const resp = await fetch(path, { ...init, headers });
  if (!resp.ok) {
    throw new ApiError(resp.status, `${path} returned ${resp.status}`);
  }
  return (await resp.json()) as T;
}

export class PortalApi {
  constructor(private base: string = "") {}

  mission(): Promise<MissionInfo> {
    return request<MissionInfo>(`${this.base}/api/mission`);
  }

  /** Always resolves on HTTP 200; ok=false means rejected credentials. */
  login(username: string, password: string): Promise<LoginResult> {
    return request<LoginResult>(`${this.base}/api/login`, {
      method: "POST",
      body: JSON.stringify({ username, password }),
    });
  }

  passes(hours: number, token: string): Promise<PassList> {
    return request<PassList>(`${this.base}/api/passes?hours=${hours}`, undefined, token);
  }

  telemetry(token: string): Promise<TelemetrySnapshot> {
    return request<TelemetrySnapshot>(`${this.base}/api/telemetry/latest`, undefined, token);
  }
}
