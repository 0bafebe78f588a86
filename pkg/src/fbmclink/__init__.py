"""Link-level simulation toolkit for FBMC-QAM with an IIC-based BICM-ID
receiver, a CP-OFDM reference, EXIT-chart convergence analysis and a
closed-form receiver complexity model."""

from .filterbank import (
    PHYDYAS_K4,
    FilterBank,
    PrototypeFilter,
    build_filter_bank,
    phydyas_coeffs,
)
from .modem import (
    CpOfdmModem,
    FbmcModem,
    QamFrame,
    TimeSignal,
    dft_matrix,
    fbmc_demodulate,
    fbmc_modulate,
    ofdm_demodulate,
    ofdm_modulate,
)
from .channel import (
    ChannelProfile,
    ChannelRealization,
    EffectiveChannel,
    awgn_profile,
    channel_tail_matrix,
    decompose_received,
    effective_channel,
    lte_profile,
    sample_realization,
    zf_equalize,
)
from .ldpc import (
    LLR_CLAMP,
    Interleaver,
    LdpcCode,
    LlrFrame,
    default_code,
    deinterleave,
    interleave,
    random_interleaver,
    sum_product_decode,
)
from .mapping import (
    Constellation,
    SoftSymbolFrame,
    gray_qam16,
    hard_decision,
    load_constellation,
    map_bits,
    soft_demap,
    soft_map,
)
from .receiver import (
    BicmIdReceiver,
    FrameLayout,
    FrameTruth,
    IterationTrace,
    ReceiverConfig,
    cancel,
    estimate_interference,
)
from .exit_chart import (
    ExitCurve,
    Trajectory,
    gen_apriori_llrs,
    inner_exit_curve,
    mi_from_samples,
    mi_from_sigma,
    outer_exit_curve,
    percentile_curves,
    sigma_from_mi,
    trajectory,
)
from .complexity import (
    ComplexityReport,
    comparison_table,
    fbmc_inner,
    hybrid_inner,
    ofdm_inner,
    total_complexity,
)
from .campaign import (
    BerPoint,
    CampaignConfig,
    build_context,
    derive_seed,
    psd_estimate,
    run_ber,
    run_exit,
)

__version__ = "0.1.0"
