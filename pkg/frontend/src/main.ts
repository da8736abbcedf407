// Browser entry point. Live mode polls the service; offline mode renders
// the four CSV reports the CLI demo writes.

import { createTicker, pollPatient } from "./client.js";
import { buildOfflineState, DemoReports } from "./csv.js";
import { renderView } from "./render.js";
import { applyPoll, isStale } from "./state.js";
import { initialViewState, makeSafeBands, ViewState } from "./types.js";

const params = new URLSearchParams(window.location.search);
const patientId = params.get("patient") ?? "bed-1";
const baseUrl = params.get("base") ?? "";

const bands = makeSafeBands({
  hrLowBpm: Number(params.get("hr_low") ?? 45),
  hrHighBpm: Number(params.get("hr_high") ?? 120),
  rrLowBpm: Number(params.get("rr_low") ?? 8),
  rrHighBpm: Number(params.get("rr_high") ?? 25),
  pollIntervalS: Number(params.get("poll_s") ?? 15),
});

let state: ViewState = initialViewState(patientId);
const root = document.getElementById("app");
if (!root) throw new Error("missing #app container");

function paint(): void {
  root!.innerHTML = renderView(state, bands);
}

const fetchLike = (url: string) => fetch(url);

const tick = createTicker(async () => {
  const outcome = await pollPatient(baseUrl, patientId, fetchLike);
  state = applyPoll(state, outcome, Date.now(), bands);
  paint();
});

function startLive(): void {
  void tick();
  setInterval(() => void tick(), bands.pollIntervalS * 1000);
  // keep the staleness badge honest between polls
  setInterval(() => {
    const stale = isStale(state, Date.now(), bands);
    if (stale !== state.stale) {
      state = { ...state, stale };
      paint();
    }
  }, 1000);
}

function wireOfflineInput(): void {
  const input = document.getElementById("report-files") as HTMLInputElement | null;
  if (!input) return;
  input.addEventListener("change", async () => {
    const files = Array.from(input.files ?? []);
    const byName = new Map(files.map((f) => [f.name, f]));
    const want = ["vitals.csv", "forecast.csv", "activity.csv", "probabilities.csv"];
    if (!want.every((n) => byName.has(n))) {
      root!.innerHTML = `<p class="error">select all four demo reports: ${want.join(", ")}</p>`;
      return;
    }
    const [vitals, forecast, activity, probabilities] = await Promise.all(
      want.map((n) => byName.get(n)!.text()),
    );
    const reports: DemoReports = { vitals, forecast, activity, probabilities };
    state = buildOfflineState(reports, bands, patientId);
    paint();
  });
}

paint();
wireOfflineInput();
if (params.get("offline") === null) startLive();
