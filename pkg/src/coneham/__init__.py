"""coneham: cone-functional certificates and solvers for Hammerstein
integral equations on [0,1].

The package encodes cones of continuous functions through characterizing
functionals, verifies the structural hypotheses and index conditions of
cone-expansion/compression fixed-point results for Hammerstein operators,
emits existence/localization certificates, and computes the localized fixed
points with an independent cross-check.
"""

from .cones import (
    ConeSpec,
    Membership,
    concave_dirichlet_cone,
    custom_cone,
    membership,
    nonneg_cone,
    range_bound,
    sample_cone,
    verify_growth,
)
from .functionals import (
    AxiomReport,
    Functional,
    check_axioms,
    check_lemsc,
    combine_min,
    concave_dirichlet,
    dist_nonneg,
    family_inf,
    jensen_gap,
    l1_norm,
    l2_norm,
    min_window,
    neg_sup,
    nparallel,
    scale,
    stieltjes,
    sum_functionals,
    sup_norm,
)
from .grid import (
    GridFunction,
    Quadrature,
    build_quadrature,
    grid_function,
    integrate,
    interp_at,
    norms,
    sample_smooth,
)
from .hammerstein import (
    Certificate,
    HammersteinProblem,
    IndexVerdict,
    apply_T,
    certify,
    check_C4,
    check_C5_C6,
    check_C7,
    check_index0,
    check_index1,
    f_lower,
    f_upper,
)
from .kernels import (
    Kernel,
    PsiFunction,
    check_C1,
    check_C2_C3,
    green_dirichlet,
    kernel_matrix,
    psi,
    psi_weighted_integral,
)
from .problems import build_problem, parse_problem_file
from .solver import (
    LocalizationReport,
    Solution,
    cross_validate,
    localize,
    picard_solve,
    shooting_oracle,
)

__version__ = "0.1.0"
