"""Ward monitoring toolkit.

Synthesizes four-tag telemetry, extracts per-minute heart rate and
respiration from it, forecasts both vitals three hours ahead, classifies
the patient's current activity, and serves everything over a small HTTP
service. See README.md for the pipeline walkthrough.
"""

from .activity import (
    ActivityDecision,
    ActivityModel,
    classify,
    load_classifier,
    save_classifier,
    train_classifier,
)
from .domain import (
    ActivityLabel,
    ActivityProbabilities,
    Demographics,
    ForecastSeries,
    Quality,
    Sex,
    TagPlacement,
    TagReading,
    VitalSample,
    bmi,
    label_from_index,
    label_index,
)
from .errors import WardMonitorError
from .forecasting import (
    ForecastModel,
    Normalizer,
    load_forecaster,
    persistence_baseline,
    predict,
    save_forecaster,
    train_forecaster,
)
from .ingest import load_mhealth, load_vitals_csv
from .metrics import balanced_accuracy, confusion, mae, mse, save_metrics_csv, split
from .nn import (
    MLP,
    Activation,
    AdamState,
    DenseLayer,
    Loss,
    TrainConfig,
    adam_step,
    backward,
    bce_loss,
    forward,
    gradient_check,
    init_mlp,
    load_mlp,
    mae_loss,
    relu,
    save_mlp,
    train,
)
from .service import MonitorService, PatientSession, make_server
from .signals import (
    ActivityWindow,
    ForecastInstance,
    VitalsTimeline,
    activity_window,
    build_timeline,
    extract_vitals,
    save_vitals_csv,
    segment_instances,
    sliding_activity_windows,
)
from .simulator import (
    ActivityScript,
    SimConfig,
    constant_schedule,
    ground_truth,
    load_sim_config,
    read_stream,
    simulate,
    write_stream,
)

__version__ = "0.1.0"
