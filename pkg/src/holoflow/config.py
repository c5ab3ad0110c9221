"""Shared numerical constants.

Every tolerance that shapes a verdict lives here so the thresholds are
documented in one place and surfaced by the CLI help text.
"""

# Radial schedules are dyadic, r_k = 1 - scale * 2**-k.  The gap 1 - r_k is
# kept at or above 2**-48: below that, generator values routinely exhaust
# double precision even though the dyadic gap itself stays exact.
SCHEDULE_FLOOR_LOG2 = 48

# Flow integration (Dormand-Prince 5(4) pair).
RK_SAFETY = 0.9
RK_MIN_FACTOR = 0.2
RK_MAX_FACTOR = 5.0
DISC_GUARD = 1e-14          # proposals with |z| >= 1 - DISC_GUARD are halved
STEP_UNDERFLOW = 1e-15      # smaller steps abort with a truncation flag
FLOW_DEFAULT_TOL = 1e-9

# Denjoy-Wolff estimation.
DW_T_MAX = 80.0
DW_SEEDS = 8
DW_STABLE_TOL = 1e-8        # three consecutive checkpoints within this

# Herglotz validation.
HERGLOTZ_TOL = 1e-9

# Koenigs quadrature (adaptive Gauss-Kronrod on straight segments).
QUAD_REL_TOL = 1e-10
QUAD_MAX_DEPTH = 20
QUAD_MAG_SPLIT = 1e6        # subdivide when |1/G| varies more than this

# Boundary-value extrapolation: h(r) = h(x) + c (1-r)^gamma; a fitted
# gamma <= 0 (or magnitudes past INFINITY_MAG with increasing trend)
# emits the infinity tag.
INFINITY_MAG = 1e8

# Singularity estimation.
SLOPE_WINDOW = 5            # consecutive dyadic radii per slope window
SINGLE_ALPHA_TOL = 0.02     # alpha_plus - alpha_minus below this => single order
M_CONV_REL = 1e-4           # Cauchy tolerance on the last three extrapolants
PHASE_DRIFT_TOL = 1e-3      # radians per decade of 1-r
ALPHA_BOUND_SLACK = 0.02    # numerical slack on the [-1, 1] order bounds

# Contact arcs.
TANGENCY_RE_TOL = 1e-8      # |lim Re(conj(s) G(r s))| below this => tangent
TANGENCY_IM_MIN = 1e-8      # limsup |Im(conj(s) G(r s))| above this => G != 0
ARC_SCAN_RESOLUTION = 2048
ARC_ENDPOINT_TOL = 1e-6     # endpoint bisection tolerance, radians
BFLOW_TANGENCY_STOP = 1e-6  # boundary flow stops when tangency residual grows past this
BFLOW_G_ZERO = 1e-8         # ... or when |G| drops below this

# Geometry verdicts: tail exponent of the last decade of terms.
TAIL_EXP_CONVERGES = -1.1
TAIL_EXP_DIVERGES = -0.9
BERTILSSON_SAMPLES = 512    # rejection samples per annulus
GEOMETRY_SEED = 20260809

# Report printing.
FLOAT_FORMAT = "%.17g"
