"""
Independent checks of a cutting-plane fit against the dense-grid oracle
"""
import logging
from dataclasses import dataclass

from splines.assembly import build_problem
from splines.qpsolve import KktResiduals, strong_convexity_gamma
from splines.smoothers import (
    check_coefficient_bound,
    fit_cutting_plane,
    fit_discretized_oracle,
    verify_kkt_certificate,
)

logger = logging.getLogger(__name__)

ORACLE_TOLERANCE = 1e-6
KKT_TOLERANCE = 1e-6


@dataclass(frozen=True, eq=False)
class VerificationReport:
    cutting_plane_cost: float
    oracle_cost: float
    relative_gap: float
    kkt: KktResiduals
    gamma: float
    bound_holds: tuple
    termination: str

    @property
    def oracle_agrees(self):
        return self.relative_gap <= ORACLE_TOLERANCE

    @property
    def kkt_holds(self):
        return self.kkt.max() <= KKT_TOLERANCE

    @property
    def passed(self):
        return self.oracle_agrees and self.kkt_holds and all(self.bound_holds)

    def as_dict(self):
        return {
            'cutting_plane_cost': self.cutting_plane_cost,
            'oracle_cost': self.oracle_cost,
            'relative_gap': self.relative_gap,
            'oracle_agrees': self.oracle_agrees,
            'kkt': self.kkt._asdict(),
            'kkt_holds': self.kkt_holds,
            'gamma': self.gamma,
            'bound_holds': list(self.bound_holds),
            'termination': self.termination,
            'passed': self.passed,
        }


def run_verification(dataset, config, grid_points=None):
    """
    Fits the data with the cutting-plane method and the grid oracle, then
    checks cost agreement, the KKT certificate of the cutting-plane result
    and the coefficient-distance bound along its whole trace
    """
    cutting_plane = fit_cutting_plane(dataset, config=config)
    oracle = fit_discretized_oracle(dataset, config=config, grid_points_per_interval=grid_points)
    matrices = build_problem(dataset.x, dataset.y, dataset.partition(), config.degree)

    gap = abs(cutting_plane.cost - oracle.cost) / max(abs(oracle.cost), 1e-300)
    kkt = verify_kkt_certificate(cutting_plane, matrices, config.lam)
    gamma = strong_convexity_gamma(matrices.A, matrices.Q, config.lam, matrices.H)
    bound = check_coefficient_bound(cutting_plane.cp_trace, oracle, gamma)

    report = VerificationReport(
        cutting_plane_cost=cutting_plane.cost,
        oracle_cost=oracle.cost,
        relative_gap=gap,
        kkt=kkt,
        gamma=gamma,
        bound_holds=bound,
        termination=cutting_plane.termination.value,
    )
    logger.info('verification %s: gap=%.3e kkt=%.3e bound=%d/%d',
                'passed' if report.passed else 'FAILED', gap, kkt.max(), sum(bound), len(bound))
    return report
