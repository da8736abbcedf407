// HTTP polling against the monitoring service. The fetch function is
// injected so tests can stub the wire.

import { parseActivity, parseForecast, parseHistory, parseVitalsSample } from "./kv.js";
import { EndpointResult, PollOutcome } from "./state.js";
import { VitalsSample } from "./types.js";

export type FetchLike = (url: string) => Promise<{ status: number; text(): Promise<string> }>;

const HISTORY_MINUTES = 75;

async function query<T>(
  fetchFn: FetchLike,
  url: string,
  parse: (body: string) => T,
): Promise<EndpointResult<T>> {
  const resp = await fetchFn(url);
  if (resp.status === 503) return { kind: "warming" };
  const body = await resp.text();
  if (resp.status !== 200) {
    throw new Error(`${url} answered ${resp.status}: ${body.trim()}`);
  }
  return { kind: "ok", value: parse(body) };
}

export async function pollPatient(
  baseUrl: string,
  patientId: string,
  fetchFn: FetchLike,
): Promise<PollOutcome> {
  const root = `${baseUrl.replace(/\/$/, "")}/api/v1/patients/${patientId}`;
  try {
    const [vitals, forecast, activity] = await Promise.all([
      query(fetchFn, `${root}/vitals/current`, parseVitalsSample),
      query(fetchFn, `${root}/forecast`, parseForecast),
      query(fetchFn, `${root}/activity`, parseActivity),
    ]);
    let history: VitalsSample[] = [];
    if (vitals.kind === "ok") {
      const to = vitals.value.minuteIndex + 1;
      const from = Math.max(0, to - HISTORY_MINUTES);
      const res = await query(
        fetchFn,
        `${root}/history?from=${from}&to=${to}`,
        parseHistory,
      );
      if (res.kind === "ok") history = res.value;
    }
    return { kind: "snapshot", vitals, forecast, activity, history };
  } catch (err) {
    return { kind: "unreachable", reason: err instanceof Error ? err.message : String(err) };
  }
}

/** Wraps a poll so that at most one is ever in flight. */
export function createTicker(poll: () => Promise<void>): () => Promise<void> {
  let inFlight = false;
  return async () => {
    if (inFlight) return;
    inFlight = true;
    try {
      await poll();
    } finally {
      inFlight = false;
    }
  };
}
