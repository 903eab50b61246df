"""Posterior sampling for Gaussian random linear models.

The sampler simulates the stochastic-localization diffusion
dz = m(z, t) dt + dB whose drift, the posterior mean given the data and the
running observation z, is approximated by Bayes-AMP. State evolution
predicts the sampler's accuracy; fixed-point scans locate the noise
threshold below which the prediction is trustworthy; exact oracles at desk
scale certify both.
"""

from .model import (Prior, ModelInstance, discrete_prior, rademacher_prior,
                    gaussian_prior, bounded_density_prior, prior_from_dict,
                    prior_to_dict, sample_prior, prior_second_moment,
                    generate_instance, load_model_config, save_instance,
                    load_instance)
from .denoiser import (EffectiveChannel, QuadratureTable, effective_channel,
                       eta_scalar, eta_prime_scalar, eta_vector, eta_and_prime,
                       mmse_star, mmse_two_channel)
from .amp import (AmpState, AmpRunResult, AmpDivergenceError, amp_init,
                  amp_step, amp_run, tau_sequence)
from .state_evolution import (SeTrace, FixedPointReport, DeltaAmpReport,
                              se_iterate, find_fixed_points, delta_amp,
                              phase_diagram, phase_diagram_to_csv)
from .sampler import (SamplerConfig, SampleRun, localize_sample,
                      localize_ensemble, reference_localization)
from .oracle import (ExactPosterior, OverlapStats, exact_posterior_enumeration,
                     exact_posterior_gaussian, overlap_stats, denoiser_oracle,
                     gaussian_drift, enumeration_drift, nishimori_check)
from .baseline import NoiseSchedule, dps_sample, dps_ensemble
from .harness import (ExperimentConfig, MetricsReport, MmseReference,
                      algorithm_mse, mmse_reference, gaussian_case_diagnostics,
                      run_experiment)

__version__ = "0.1.0"
