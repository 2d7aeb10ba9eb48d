"""TPR and FPR of the full-family check at N, N/10 and N/100 against the RZ(pi/6) adversary.

Run: python demos/06_budget_sweep.py
"""
from qcontract.experiments import ExperimentConfig, experiment_sample_complexity

art = experiment_sample_complexity(ExperimentConfig(experiment="sample", trials=100), progress=print)
print("true adversary deviation:", round(art.deviations["true_adversary_deviation"]["max_dev"], 4))
