"""Monte-Carlo verification of propagated Poisson statistics.

Samples many noisy realizations of a phantom, pushes each through a
discrete Radon transform and optionally per-projection wavelets, then
compares empirical coefficient statistics against the propagated
predictions: means against the noiseless transform, variances against
the moment-matched model, per-coefficient mean/variance ratios with
confidence intervals, variance-vs-intensity regressions, and a
chi-square goodness-of-fit check for integer-valued variants.
"""

import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, poisson

from .phantoms import make_phantom, sample_poisson
from .radon import drt_gdb, drt_rotation, propagate_intensity
from .seeding import derive_rng
from .wavelet import dwt_forward, wavelet_atom

__all__ = [
    "DistReport",
    "LineFit",
    "run_distribution_experiment",
    "variance_vs_intensity",
]

LineFit = namedtuple("LineFit", ["slope", "intercept", "r_squared"])


def _normal_ci(values):
    """95% normal-approximation CI over a population of per-coefficient stats."""
    values = np.asarray(values, dtype=float)
    n = values.size
    if n == 0:
        return (float("nan"), float("nan"))
    center = float(values.mean())
    if n < 2:
        return (center, center)
    half = 1.96 * float(values.std(ddof=1)) / math.sqrt(n)
    return (center - half, center + half)


def _ols(x, y):
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size < 3:
        raise ValueError("need at least 3 scatter points for a fit")
    design = np.column_stack([x, np.ones_like(x)])
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    ss_res = float(((y - slope * x - intercept) ** 2).sum())
    ss_tot = float(((y - y.mean()) ** 2).sum())
    if ss_tot == 0.0:
        r2 = 1.0 if ss_res < 1e-24 else 0.0
    else:
        r2 = 1.0 - ss_res / ss_tot
    return LineFit(slope, intercept, r2)


@dataclass
class DistReport:
    """Distributional summary of one coefficient band.

    Per-coefficient arrays keep the full band shape. Aggregate statistics
    and their 95% CIs are taken over the population of coefficients whose
    prediction driver is positive (and whose empirical variance is
    positive, for the ratio rows). scatter pairs the driver with the
    empirical variance; for the radon and approximation bands the driver
    is the predicted mean, for detail bands the predicted variance.
    """

    band: str
    level: int
    samples: int
    n_coefficients: int
    empirical_mean: np.ndarray
    empirical_variance: np.ndarray
    predicted_mean: np.ndarray
    predicted_variance: np.ndarray
    # mean_diff and its CI are computed over per-sample averages, not
    # over coefficients: coefficients share pixels, so their deviations
    # carry the common-mode fluctuation of the total count and a
    # coefficient-population CI would be far too narrow.
    mean_ci: tuple
    variance_ci: tuple
    mean_var_ratio: float
    mean_var_ratio_ci: tuple
    var_pred_ratio: float
    var_pred_ratio_ci: tuple
    mean_diff: float
    mean_diff_ci: tuple
    scatter: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    gof_pass_fraction: float = None
    gof_tested: int = 0


def _band_report(band, level, samples, s1, s2, d1, d2,
                 pred_mean, pred_var, driver):
    emp_mean = s1 / samples
    emp_var = (s2 - s1 * emp_mean) / (samples - 1)
    emp_var = np.maximum(emp_var, 0.0)

    valid = driver > 0
    ratio_ok = valid & (emp_var > 0)
    ratios = emp_mean[ratio_ok] / emp_var[ratio_ok]
    pred_ratios = pred_var[ratio_ok] / emp_var[ratio_ok]
    diff_mean = d1 / samples
    diff_sd = math.sqrt(max(d2 - d1 * diff_mean, 0.0) / (samples - 1))
    diff_half = 1.96 * diff_sd / math.sqrt(samples)
    scatter = np.column_stack([driver[valid], emp_var[valid]])
    if scatter.shape[0] >= 3:
        fit = _ols(scatter[:, 0], scatter[:, 1])
    else:
        fit = LineFit(float("nan"), float("nan"), float("nan"))

    return DistReport(
        band=band,
        level=level,
        samples=samples,
        n_coefficients=int(valid.sum()),
        empirical_mean=emp_mean,
        empirical_variance=emp_var,
        predicted_mean=pred_mean,
        predicted_variance=pred_var,
        mean_ci=_normal_ci(emp_mean[valid]),
        variance_ci=_normal_ci(emp_var[valid]),
        mean_var_ratio=float(ratios.mean()) if ratios.size else float("nan"),
        mean_var_ratio_ci=_normal_ci(ratios),
        var_pred_ratio=float(pred_ratios.mean()) if pred_ratios.size else float("nan"),
        var_pred_ratio_ci=_normal_ci(pred_ratios),
        mean_diff=diff_mean,
        mean_diff_ci=(diff_mean - diff_half, diff_mean + diff_half),
        scatter=scatter,
        slope=fit.slope,
        intercept=fit.intercept,
        r_squared=fit.r_squared,
    )


def _analysis_matrix(spec, level, band, n):
    """Rows are analysis atoms, so matrix @ signal equals the band."""
    nb = n // 2 ** level if spec.mode == "decimated" else n
    rows = [wavelet_atom(spec, level, k, n, band=band) for k in range(nb)]
    return np.stack(rows, axis=0)


def _merge_sparse_bins(expected, minimum=5.0):
    """Pool adjacent bins until each group's expectation reaches minimum.

    Greedy: repeatedly fold the smallest group into its smaller neighbor.
    Returns a list of index lists (possibly a single group).
    """
    groups = [[k] for k in range(len(expected))]
    totals = [float(e) for e in expected]
    while len(totals) > 1 and min(totals) < minimum:
        i = int(np.argmin(totals))
        if i == 0:
            j = 1
        elif i == len(totals) - 1:
            j = i - 1
        else:
            j = i - 1 if totals[i - 1] <= totals[i + 1] else i + 1
        lo, hi = sorted((i, j))
        groups[lo] = groups[lo] + groups[hi]
        totals[lo] += totals[hi]
        del groups[hi], totals[hi]
    return groups


def _gof_fraction(hist, rates, samples, alpha=0.01):
    """Fraction of coefficients passing a Poisson chi-square GOF test.

    hist holds per-coefficient outcome counts with the last bin catching
    overflow. Coefficients are grouped by rate so binning and critical
    values are computed once per distinct intensity.
    """
    flat_hist = hist.reshape(-1, hist.shape[-1])
    flat_rates = np.asarray(rates, dtype=float).ravel()
    usable = flat_rates > 0
    top = hist.shape[-1] - 1

    passed = 0
    tested = 0
    keys = np.round(flat_rates[usable], 9)
    for lam in np.unique(keys):
        rows = flat_hist[usable][keys == lam]
        expected = np.empty(top + 1)
        expected[:top] = samples * poisson.pmf(np.arange(top), lam)
        expected[top] = samples * poisson.sf(top - 1, lam)
        groups = _merge_sparse_bins(expected)
        if len(groups) < 2:
            continue
        folded = np.stack([rows[:, idx].sum(axis=1) for idx in groups], axis=1)
        exp_folded = np.array([expected[idx].sum() for idx in groups])
        stat = ((folded - exp_folded) ** 2 / exp_folded).sum(axis=1)
        crit = chi2.ppf(1.0 - alpha, len(groups) - 1)
        passed += int((stat <= crit).sum())
        tested += rows.shape[0]
    if tested == 0:
        return float("nan"), 0
    return passed / tested, tested


def run_distribution_experiment(spec, transform, samples, seed,
                                wavelet=None, gof=False):
    """Sample noisy phantoms and summarize transform-coefficient statistics.

    Parameters
    ----------
    spec : PhantomSpec
    transform : TransformConfig
    samples : int
        Monte-Carlo sample count, at least 100.
    seed : int
        Top-level seed; sample i uses a stream derived from (seed, i).
    wavelet : WaveletSpec, optional
        When given, per-projection pyramids are accumulated too and the
        result gains one report per detail level plus the approximation.
    gof : bool
        Also run the per-coefficient Poisson chi-square test on the
        radon band. Requires an integer-valued variant (gdb, or rotation
        with nearest interpolation).

    Returns
    -------
    list of DistReport
        Radon band first, then details finest to coarsest, then the
        approximation band.
    """
    if samples < 100:
        raise ValueError("samples must be at least 100")
    integer_valued = transform.variant == "gdb" or transform.interp == "nearest"
    if gof and not integer_valued:
        raise ValueError(
            "chi-square GOF needs integer-valued coefficients "
            "(gdb variant or nearest interpolation)")

    intensity = make_phantom(spec)
    true_sino = propagate_intensity(intensity, transform)
    rates = true_sino.data
    n_off, n_cols = rates.shape

    band_specs = []
    if wavelet is not None:
        for level in range(1, wavelet.levels + 1):
            band_specs.append(("detail", level))
        band_specs.append(("approximation", wavelet.levels))

    matrices = [_analysis_matrix(wavelet, lvl, b, n_off) for b, lvl in band_specs]
    pred_mean = [m @ rates for m in matrices]
    pred_var = [(m ** 2) @ rates for m in matrices]
    drivers = [pm if b == "approximation" else pv
               for (b, _), pm, pv in zip(band_specs, pred_mean, pred_var)]

    radon_valid = rates > 0
    band_valid = [d > 0 for d in drivers]

    s1_r = np.zeros_like(rates)
    s2_r = np.zeros_like(rates)
    d1_r = d2_r = 0.0
    s1_w = [np.zeros_like(p) for p in pred_mean]
    s2_w = [np.zeros_like(p) for p in pred_mean]
    d1_w = [0.0] * len(band_specs)
    d2_w = [0.0] * len(band_specs)

    hist = None
    if gof:
        top = int(poisson.isf(1e-9, max(rates.max(), 1e-3))) + 1
        hist = np.zeros((n_off * n_cols, top + 1), dtype=np.int64)
        row_idx = np.arange(n_off * n_cols)

    for i in range(samples):
        rng = derive_rng(seed, "mc-sample", i)
        counts = sample_poisson(intensity, rng=rng)
        if transform.variant == "gdb":
            data = drt_gdb(counts).data
        else:
            data = drt_rotation(counts, angles=transform.angles,
                                interp=transform.interp).data
        s1_r += data
        s2_r += data * data
        if radon_valid.any():
            diff = float((data - rates)[radon_valid].mean())
            d1_r += diff
            d2_r += diff * diff
        if hist is not None:
            vals = np.clip(np.rint(data).astype(np.int64).ravel(), 0, top)
            np.add.at(hist, (row_idx, vals), 1)
        if band_specs:
            pyr = dwt_forward(data, wavelet)
            for j, (band, level) in enumerate(band_specs):
                arr = pyr.details[level - 1] if band == "detail" else pyr.approximation
                s1_w[j] += arr
                s2_w[j] += arr * arr
                if band_valid[j].any():
                    diff = float((arr - pred_mean[j])[band_valid[j]].mean())
                    d1_w[j] += diff
                    d2_w[j] += diff * diff

    reports = [_band_report("radon", 0, samples, s1_r, s2_r, d1_r, d2_r,
                            rates, rates.copy(), rates)]
    if gof:
        frac, tested = _gof_fraction(hist.reshape(n_off, n_cols, -1),
                                     rates, samples)
        reports[0].gof_pass_fraction = frac
        reports[0].gof_tested = tested

    for j, (band, level) in enumerate(band_specs):
        reports.append(_band_report(band, level, samples, s1_w[j], s2_w[j],
                                    d1_w[j], d2_w[j], pred_mean[j],
                                    pred_var[j], drivers[j]))
    return reports


def variance_vs_intensity(report):
    """OLS fit of empirical variance on the noiseless driver intensity.

    Accepts a DistReport, a list of them (scatters pooled), or a raw
    (n, 2) array. Needs at least 3 points.
    """
    if isinstance(report, DistReport):
        pts = report.scatter
    elif isinstance(report, (list, tuple)):
        pts = np.vstack([r.scatter for r in report])
    else:
        pts = np.asarray(report, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("scatter must be an (n, 2) array")
    return _ols(pts[:, 0], pts[:, 1])
