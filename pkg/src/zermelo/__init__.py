"""Time-optimal navigation in planar drift fields via Randers geodesics."""
from .affine_spray import AffineConstants, affine_constants, affine_spray_eval
from .control import HeadingSchedule, optimize_headings, simulate_control
from .errors import (DomainExit, FieldNotWeak, GoalUnreachable, NoConvergence, NotOnIndicatrix,
                     ParseError, PointOutsideDomain, StencilOutsideDomain, StepSizeUnderflow,
                     StrongWind, ZermeloError, ZeroVector)
from .geodesic import (GeodesicState, IntegratorOptions, Trajectory, geodesic_rhs,
                       integrate_geodesic, recover_heading)
from .navigator import NavigationProblem, NavigationSolution, miss_distance, solve_navigation
from .randers import (RandersData, hessian_spray, metric_value, navigation_tensors, randers_data,
                      zeta_spray)
from .wind import (AffineWind, AnalyticWind, Domain, GridWind, WindField, affine_fit, eval_wind,
                   jacobian_wind, load_wind_spec, validate_weak)

__version__ = "0.1.0"
