"""skewlav: parabolic implosion for skew-products tangent to the identity."""

from .germs import (
    BivariatePoly,
    DerivedConstants,
    NormalFormParams,
    Poly1,
    SkewMap,
    build_skew,
    characteristic_directions,
    derived_constants,
    historic_degree7_map,
    iterate,
    parabolic_curve_jet,
    quadratic_example_b,
    quadratic_example_map,
    skew_from_json,
    skew_to_json,
    validate_normal_form,
)
from .fatou import (
    FatouEngine,
    HornValue,
    abel_series,
    horn_derivative,
    horn_family_free_value,
    horn_family_step,
    lavaurs,
    lavaurs_w_derivative,
    lifted_horn,
    lifted_horn_of_P,
)
from .jets import Jet
from .renorm import (
    ApproxFatou,
    EggbeaterTrace,
    RenormReport,
    StripMap,
    F_c,
    eggbeater_trace,
    error_A,
    error_A0,
    gamma_constant,
    historic_fixed_point_data,
    historic_measures,
    log_sin_integral,
    verify_main_theorem,
)
from .sequences import (
    AdmissibleSeq,
    SeqReconstruction,
    detect_cycle,
    generate_greedy,
    linear_combine,
    perturb,
    pisot_sequence,
    pisot_test,
    rational_beta_construct,
    reconstruct,
    reduce,
    shift,
)
from .explore import (
    PixelClass,
    RasterGrid,
    classify_convergence_direction,
    classify_param_point,
    classify_slice_point,
    find_horn_critical_point,
    multiplier,
    q0_invariance_fraction,
    raster_sidecar,
    raster_to_ppm,
    render_param,
    render_slice,
    super_attracting_locus,
)

__version__ = "0.1.0"
