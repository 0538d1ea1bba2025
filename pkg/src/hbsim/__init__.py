"""Link-level simulator for multi-user uplink MIMO receivers that pair a
two-stage analog combiner (gain aggregation + DFT spreading) with
low-resolution ADCs."""

from .channel import (
    ChannelRealization,
    PathParams,
    VirtualChannelRealization,
    arv,
    draw_path_count,
    gen_geometric_channel,
    gen_homogeneous_channel,
    gen_rayleigh_channel,
    gen_virtual_channel,
)
from .combiner import (
    AnalogCombinerPair,
    Codebook,
    DigitalCombiner,
    aoa_combiner,
    arv_tsac,
    build_codebook,
    dft_matrix,
    digital_combiner,
    greedy_mi,
    svd_combiner,
)
from .metrics import (
    MomentScenario,
    RateReport,
    TheoryInputs,
    db_to_linear,
    empirical_moments,
    mutual_information,
    per_user_rate,
    theory_ergodic_rate,
    theory_optimal_mi,
    theory_quantization_noise,
    theory_svd_upper_bound,
)
from .montecarlo import (
    ConfigError,
    ExperimentConfig,
    SweepResult,
    figure_preset,
    load_config,
    run_sweep,
    save_config,
    write_csv,
)
from .quantizer import (
    QuantizerModel,
    ScalarQuantizer,
    distortion_factor,
    lloyd_max_design,
    quantization_covariance,
    scalar_quantize,
)

__version__ = "0.1.0"
