"""Word metrics, distortion certificates, and numerically verified
generating sets for circle and sphere transformation groups.

The library has three layers: a generic word-metric toolkit (reduced words,
exact breadth-first word length against pluggable equality oracles,
translation-length and distortion tables), exact model groups (rational
matrix groups with certified operator norms, the affine dyadic model of
the doubling relation), and numeric engines for circle and sphere
homeomorphisms that build explicit finite generating sets in which high
powers of rigid rotations, and of arbitrary pre-factored homeomorphisms,
are expressed by short words and verified pointwise.
"""

from .words import (
    GeneratorAlphabet,
    GroupWord,
    GroupOracle,
    GrowthFunction,
    DistortionCertificate,
    CertificateEntry,
    word,
    reduce_letters,
    word_length_bfs,
    translation_length_estimate,
    distortion_function,
    quasi_compare,
    rewriting_constant,
    quasimorphism_lower_bound,
    certificate_check,
    free_oracle,
    integer_oracle,
)
from .matrices import (
    RationalMatrix,
    AffineDyadicMap,
    op_norm_length,
    distorted_in_GL,
    bs_oracle,
    bs_power_certificate,
    length_function_bound,
    doubling_tower_certificate,
    verify_doubling_tower_entry,
)
from .bumps import bump_B, s01
from .spheres import (
    MapExpr,
    SpherePoint,
    Rotation,
    RotPlus,
    RotMinus,
    Scale,
    FMap,
    Inversion,
    LatMap,
    LongMap,
    Mobius,
    Compose,
    Inverse,
    AngleProfile,
    RadialProfile,
    rot_factor,
    lat_compose,
    long_conjugate,
    fibonacci_sphere_grid,
    sup_displacement,
    map_distance,
    derivative_norm,
)
from .schedule import ThetaDescription, RotationSchedule, make_schedule, parse_theta
from .wreath import (
    CoeffMap,
    TailDescriptor,
    WreathElement,
    coset_action,
    wreath_mul,
    wreath_inv,
    build_f_i,
    realize,
    regularity_estimate,
    RegularityClass,
)
from . import circles, s1, s2, sn
from .reports import ExperimentConfig, RunReport, run, emit_distortion_table

__version__ = "0.1.0"
