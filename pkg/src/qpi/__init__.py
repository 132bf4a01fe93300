"""Learning quantum potentials from wave functions with physics-informed networks."""

__version__ = "0.1.0"

from .catalog import get_system, kinetic_ratio, perturbed_pib_wavefunction, h2_density, system_ids, true_potential, eval_psi
from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    NodalPointError,
    QPIError,
    QuadratureError,
    SamplingError,
)
from .jets import Dual2D, Jet3
from .losses import LossSpec, OraclePotential, supervised_pib_loss, tdse_loss, tise_loss, wigner_moyal_loss
from .metrics import MetricsReport, build_report, energy_curve, rk4_invert, rmse
from .network import MlpParams, forward, forward_dual2, forward_jet, grad_params, init_params
from .trainer import TrainConfig, TrainingHistory, sample_domain, train
from .wigner import wigner_ho, wigner_pt
