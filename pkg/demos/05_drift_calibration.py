"""Synthetic drift timepoints and the tolerance interval they imply.

Run: python demos/05_drift_calibration.py
"""
from qcontract.experiments import ExperimentConfig, experiment_drift

for exact in (True, False):
    art = experiment_drift(ExperimentConfig(experiment="drift", exact=exact))
    print("exact fingerprints" if exact else "2280 shots per observable, default noise")
    for quantity, value in art.tables["drift"].rows:
        print(f"  {quantity:36s} {value:.4f}" if isinstance(value, float) else f"  {quantity:36s} {value}")

big = experiment_drift(ExperimentConfig(experiment="drift", exact=True, drift_targets=(0.35, 0.35, 0.3)))
print("\nlarge drift:", big.extra["remediation"])
