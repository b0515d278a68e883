"""Synthetic quarterly fundamentals with a sequential signal.

Each company carries a latent AR(1) state z. Its EV ratios are noisy linear
read-outs of z, and EBIT/EV reported for quarter t is an exact linear
function of z at t-1 and t-2, so the next-quarter target depends on the
last two quarters of the window. Innovations of z switch between a calm
regime with tiny moves and turbulent spells of several quarters with large
shocks. The best forecast therefore gates how much it trusts the latest,
noisy features on whether the company has recently been turbulent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from yieldseq.datapipe import EBIT_INDEX, FEATURES, Period, QuarterlyRecord
from yieldseq.numcore import SeededRng

SECTORS = ("Industrials", "Technology", "Health Care", "Consumer", "Energy", "Materials")
NET_INCOME_INDEX = FEATURES.index("net_income")


@dataclass(frozen=True)
class SynthConfig:
    """Panel size and latent-process settings.

    ``shock_prob`` is the long-run share of turbulent quarters and
    ``regime_persistence`` the chance a turbulent quarter is followed by
    another one.
    """

    companies: int = 200
    quarters: int = 40
    start: Period = Period(2009, 1)
    persistence: float = 0.9
    shock_prob: float = 0.15
    regime_persistence: float = 0.9
    shock_scale: float = 1.0
    drift_scale: float = 0.02
    obs_noise: float = 0.3
    yield_level: float = 0.10
    yield_current: float = 0.02
    yield_lag: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.companies < 1 or self.quarters < 1:
            raise ValueError("companies and quarters must be >= 1")
        if not 0.0 < self.shock_prob < 1.0 or not 0.0 <= self.regime_persistence < 1.0:
            raise ValueError("shock_prob must be in (0, 1) and regime_persistence in [0, 1)")
        if not -1.0 < self.persistence < 1.0:
            raise ValueError("persistence must be in (-1, 1)")


# Typical EV ratios and how strongly each one tracks the latent state.
# EBIT and net income are set from the yield equation instead.
BASE_RATIOS = np.array([0.90, 0.55, 0.20, 0.10, 0.07, 0.15, 0.12, 0.10, 0.40, 0.05,
                        0.06, 0.09, 0.08, 0.45])
RATIO_SCALE = np.array([0.10, 0.06, 0.03, 0.0, 0.0, 0.03, 0.02, 0.02, 0.05, 0.01,
                        0.01, 0.015, 0.015, 0.06])
LOADINGS = np.array([1.0, 0.8, 0.5, 0.0, 0.0, -0.6, 0.7, 0.4, -0.3, 0.5,
                     -0.5, 0.6, -0.4, -0.8])


def latent_paths(cfg: SynthConfig, rng: SeededRng) -> np.ndarray:
    """(companies, quarters + 2) latent states; the two extra lead-in quarters seed the lags."""
    n, T = cfg.companies, cfg.quarters + 2
    z = np.empty((n, T))
    stat_sd = np.sqrt((cfg.shock_prob * cfg.shock_scale ** 2 + (1 - cfg.shock_prob) * cfg.drift_scale ** 2)
                      / (1 - cfg.persistence ** 2))
    z[:, 0] = rng.normal(0.0, stat_sd, n)
    share, stay = cfg.shock_prob, cfg.regime_persistence
    # entry rate that keeps the stationary turbulent share at `share`
    enter = share * (1.0 - stay) / (1.0 - share)
    shock = rng.uniform(0.0, 1.0, n) < share
    for t in range(1, T):
        u = rng.uniform(0.0, 1.0, n)
        shock = np.where(shock, u < stay, u < enter)
        scale = np.where(shock, cfg.shock_scale, cfg.drift_scale)
        z[:, t] = cfg.persistence * z[:, t - 1] + scale * rng.normal(0.0, 1.0, n)
    return z


def generate(cfg: SynthConfig = SynthConfig()) -> list[QuarterlyRecord]:
    """Records ordered by company then quarter; fully determined by ``cfg``."""
    return generate_with_latent(cfg)[0]


def generate_with_latent(cfg: SynthConfig = SynthConfig()):
    """Like :func:`generate` but also returns the latent paths (column t+2 is quarter t)."""
    rng = SeededRng(cfg.seed)
    z = latent_paths(cfg, rng)
    n, T = cfg.companies, cfg.quarters
    records = []
    for c in range(n):
        cid = f"C{c:04d}"
        sector = SECTORS[c % len(SECTORS)]
        ev = float(np.exp(rng.normal(8.0, 1.0)))
        noise = rng.normal(0.0, cfg.obs_noise, (T, len(FEATURES)))
        growth = rng.normal(0.01, 0.05, T)
        cap_share = rng.uniform(0.6, 0.95)
        for t in range(T):
            ratios = BASE_RATIOS + RATIO_SCALE * (LOADINGS * z[c, t + 2] + noise[t])
            ebit = cfg.yield_level + cfg.yield_current * z[c, t + 1] + cfg.yield_lag * z[c, t]
            ratios[EBIT_INDEX] = ebit
            ratios[NET_INCOME_INDEX] = 0.7 * ebit
            ev *= float(np.exp(growth[t]))
            period = Period.from_index(cfg.start.index + t)
            records.append(QuarterlyRecord(cid, sector, period, ev * cap_share, ev,
                                           tuple(float(r * ev) for r in ratios)))
    return records, z
