"""Learning-curve sweeps.

Every sweep is split into cells ``(group, replica)``.  A group fixes the
kernels, the dimension and the grid of training sizes; a replica is one
independent draw of points (and Teacher field).  ``run_cell`` returns the
values of one replica along the grid, so cells can run in any order or in
parallel and be aggregated afterwards.
"""
from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from ._linalg import cholesky_jitter
from ._seeding import rng
from .datasets import load_cifar10, load_mnist
from .fitting import LearningCurve, fit_power_law
from .geometry import nn_distances, sphere_points
from .kernels import KernelSpec, cross_gram, gram
from .lattice import StarSumConfig, exact_lattice_mse, theorem_beta
from .regression import nested_test_errors
from .spectral import (
    SpectralWeights,
    asymptotic_exponent_appH,
    beta_from_tail,
    kernel_pca,
    selfconsistent_curve,
    tail_power_curve,
)
from .svm import classify, error_rate, train_soft_margin

__all__ = [
    "Group",
    "SWEEPS",
    "geometric_grid",
    "teacher_student_replica",
    "teacher_student_curve",
    "lattice_mse_curve",
    "run_group",
    "aggregate",
]


def geometric_grid(start, stop, num) -> np.ndarray:
    """Increasing integers spread geometrically over ``[start, stop]``."""
    g = np.unique(np.rint(np.geomspace(start, stop, int(num))).astype(int))
    return g[(g >= start) & (g <= stop)]


@dataclass
class Group:
    """One curve of a sweep: a label, its grid and its replica count."""

    label: dict
    n: np.ndarray
    replicas: int
    params: dict = field(default_factory=dict)

    @property
    def tag(self) -> str:
        return "_".join(f"{k}{v}" for k, v in self.label.items()) or "all"


# ----------------------------------------------------------------- kernels


def kernel_from(cfg: dict, dim=None) -> KernelSpec:
    cfg = dict(cfg)
    if cfg.get("sigma") == "dim":
        cfg["sigma"] = float(dim)
    return KernelSpec(
        cfg.get("family", "laplace"),
        sigma=float(cfg.get("sigma", 1.0)),
        nu=float(cfg.get("nu", 0.5)),
        amplitude=float(cfg.get("amplitude", 1.0)),
    )


def _as_list(x):
    return list(x) if isinstance(x, (list, tuple)) else [x]


def grid_from(spec) -> np.ndarray:
    if isinstance(spec, dict):
        return geometric_grid(spec["start"], spec["stop"], spec["num"])
    return np.asarray(spec, dtype=int)


def _kernel_label(k: KernelSpec) -> str:
    s = f"{k.family.value}"
    if k.family.value == "matern":
        s += f"{k.nu:g}"
    return s


# --------------------------------------------------------- teacher-student


def teacher_student_replica(teacher, student, dim, n_grid, n_test, seed, estimator="sampled"):
    """Test MSE along ``n_grid`` for one replica on the ``dim``-sphere.

    One set of ``max(n_grid) + n_test`` points is drawn and the Teacher field
    is sampled on all of them jointly; training sets are the leading
    ``n`` points, so the curve of a replica is nested.  ``estimator``
    ``"closed_form"`` replaces the sampled field by the exact Teacher
    average of the test error.

    Returns ``(mse, jitter)`` with the largest jitter used.
    """
    n_grid = np.asarray(n_grid, dtype=int)
    n_max = int(n_grid.max())
    pts = sphere_points(n_max + n_test, dim, seed).coords
    train, test = pts[:n_max], pts[n_max:]
    same = teacher == student
    if estimator == "sampled":
        LT, jT = cholesky_jitter(gram(teacher, pts))
        z = LT @ rng(seed, "field").standard_normal(n_max + n_test)
        if same and jT == 0.0:
            LS, jS = LT[:n_max, :n_max], 0.0
        else:
            LS, jS = cholesky_jitter(gram(student, train))
        cross = cross_gram(student, test, train)
        mse = nested_test_errors(LS, cross, z[:n_max], z[n_max:], n_grid)
        return mse, max(jT, jS)
    if estimator != "closed_form":
        raise ValueError(f"unknown estimator {estimator!r}")
    KS = gram(student, train)
    LS, jS = cholesky_jitter(KS)
    kS = cross_gram(student, train, test)
    kT = kS if same else cross_gram(teacher, train, test)
    KT = KS if same else gram(teacher, train)
    kt0 = teacher.prior_variance(dim)
    mse = np.empty(n_grid.size)
    for i, n in enumerate(n_grid):
        Ln = LS[:n, :n]
        B = linalg.cho_solve((Ln, True), kS[:n], check_finite=False)
        cross_term = np.einsum("ij,ij->j", B, kT[:n])
        if same:
            e = kt0 - cross_term
        else:
            e = kt0 - 2.0 * cross_term + np.einsum("ij,ij->j", B, KT[:n, :n] @ B)
        mse[i] = e.mean()
    return mse, jS


def teacher_student_curve(teacher, student, dim, n_grid, replicas, n_test=1000, seed=0, estimator="sampled"):
    """Replica-averaged learning curve (serial convenience wrapper)."""
    rows = [
        teacher_student_replica(teacher, student, dim, n_grid, n_test, (seed, r), estimator)[0]
        for r in range(replicas)
    ]
    return LearningCurve.from_replicas(n_grid, np.array(rows))


def _plan_teacher_student(cfg):
    groups = []
    for tcfg in _as_list(cfg["teacher"]):
        for dim in _as_list(cfg["dims"]):
            teacher = kernel_from(tcfg, dim)
            student = kernel_from(cfg["student"], dim)
            label = {"teacher": _kernel_label(teacher), "student": _kernel_label(student), "d": dim}
            groups.append(Group(label, grid_from(cfg["n_grid"]), int(cfg["replicas"]),
                                {"teacher": teacher, "student": student, "dim": dim}))
    return groups


def _run_teacher_student(cfg, group, seed):
    p = group.params
    mse, jitter = teacher_student_replica(
        p["teacher"], p["student"], p["dim"], group.n, int(cfg["n_test"]), seed, cfg["estimator"]
    )
    return {"value": mse, "jitter": np.full(group.n.size, jitter)}


def _theory_teacher_student(cfg, group):
    p = group.params
    try:
        return {"beta_theory": theorem_beta(p["teacher"].tail(p["dim"]), p["student"].tail(p["dim"]), p["dim"])}
    except ValueError:
        return {}


# ------------------------------------------------------------- lattice-mse


def lattice_mse_curve(teacher, student, d, m_list, L=1.0, cfg=None) -> LearningCurve:
    m = np.asarray(m_list, dtype=int)
    vals = np.array([exact_lattice_mse(teacher, student, d, L, int(mi), cfg) for mi in m])
    return LearningCurve(m**d, vals, 0.0, 1, {"m": m})


def _plan_lattice(cfg):
    groups = []
    m = grid_from(cfg["m"])
    for tcfg in _as_list(cfg["teacher"]):
        for d in _as_list(cfg["d"]):
            teacher, student = kernel_from(tcfg, d), kernel_from(cfg["student"], d)
            label = {"teacher": _kernel_label(teacher), "student": _kernel_label(student), "d": d}
            groups.append(Group(label, m**d, 1, {"teacher": teacher, "student": student, "d": d, "m": m}))
    return groups


def _run_lattice(cfg, group, seed):
    p = group.params
    ss = cfg["star_sum"]
    sc = StarSumConfig(ss.get("truncation"), float(ss["rel_tol"]), ss.get("max_truncation"))
    c = lattice_mse_curve(p["teacher"], p["student"], p["d"], p["m"], float(cfg["L"]), sc)
    return {"value": c.value, "m": p["m"].astype(float)}


def _theory_lattice(cfg, group):
    p = group.params
    return {"beta_theory": theorem_beta(p["teacher"].tail(p["d"]), p["student"].tail(p["d"]), p["d"])}


# -------------------------------------------------------------- datasets


@functools.lru_cache(maxsize=4)
def _load_dataset(name, paths):
    if name == "mnist":
        return load_mnist(*paths)
    if name == "cifar10":
        return load_cifar10(list(paths))
    raise ValueError(f"unknown dataset {name!r}")


def dataset_from(cfg):
    data = cfg["data"]
    name = cfg["dataset"]
    if name == "mnist":
        paths = (data["mnist_images"], data["mnist_labels"])
    else:
        paths = tuple(_as_list(data["cifar_batches"]))
    return _load_dataset(name, paths)


# ------------------------------------------------------------------- kpca


def _plan_kpca(cfg):
    nt = int(cfg["n_tilde"])
    n = grid_from(cfg["n_grid"]) if cfg.get("n_grid") else geometric_grid(1, nt, 60)
    label = {"source": cfg["source"], "ntilde": nt}
    return [Group(label, n, int(cfg["replicas"]))]


def kpca_labels(cfg, seed):
    """Points, labels and Student kernel for one kernel-PCA replica."""
    nt = int(cfg["n_tilde"])
    if cfg["source"] == "synthetic":
        dim = int(cfg["dim"])
        teacher = kernel_from(cfg["teacher"], dim)
        student = kernel_from(cfg["student"], dim)
        pts = sphere_points(nt, dim, seed).coords
        LT, _ = cholesky_jitter(gram(teacher, pts))
        z = LT @ rng(seed, "field").standard_normal(nt)
        return pts, z, student
    ds = dataset_from(cfg)
    idx = rng(seed).choice(ds.n, size=nt, replace=False)
    return ds.points.coords[idx], ds.labels[idx], kernel_from(cfg["student"])


def _run_kpca(cfg, group, seed):
    pts, z, student = kpca_labels(cfg, seed)
    dec = kernel_pca(gram(student, pts), z)
    return {"value": tail_power_curve(dec, group.n).value}


def _fit_kpca(cfg, group, curve):
    window = cfg["fit"]["window"]
    fit = beta_from_tail(curve, tuple(window) if window else None, cfg["tail_method"], int(cfg["n_tilde"]))
    return fit


# --------------------------------------------------------------- mode sum


def weights_from(cfg) -> tuple[SpectralWeights, float, float]:
    sp = cfg["spectrum"]
    modes = int(sp["modes"])
    if sp.get("theta") is not None:
        theta = float(sp["theta"])
        q = float(sp.get("q", 0.0))
    else:
        d = float(sp["d"])
        theta = 1.0 + d / float(sp["alpha_S"])
        aT = float(sp["alpha_T"])
        theta_T = 1.0 + d / aT
        q = (theta - theta_T) / (theta_T - 1.0)
    return SpectralWeights.power_law(modes, theta, q), theta, q


def _plan_mode_sum(cfg):
    return [Group({"spectrum": "power"}, grid_from(cfg["n_grid"]), 1)]


def _run_mode_sum(cfg, group, seed):
    w, _, _ = weights_from(cfg)
    c = selfconsistent_curve(w, group.n)
    return {"value": c.value, "t": c.extra["t"], "gamma": c.extra["gamma"]}


def _theory_mode_sum(cfg, group):
    _, theta, q = weights_from(cfg)
    try:
        return {"theta": theta, "q": q, "beta_theory": asymptotic_exponent_appH(theta, q)}
    except ValueError:
        return {"theta": theta, "q": q}


# ----------------------------------------------------------------- effdim


def _plan_effdim(cfg):
    sizes = grid_from(cfg["subset_sizes"])
    label = {"source": cfg["source"]}
    if cfg["source"] == "hypersphere":
        label["d"] = cfg["dim"]
    return [Group(label, sizes, int(cfg["replicas"]))]


@functools.lru_cache(maxsize=2)
def _sphere_cache(n, dim, seed):
    return sphere_points(n, dim, seed).coords


def _run_effdim(cfg, group, seed):
    if cfg["source"] == "hypersphere":
        pts = _sphere_cache(int(cfg["n_points"]), int(cfg["dim"]), int(cfg["seed"]))
    else:
        pts = dataset_from(cfg).points.coords
    out = np.empty(group.n.size)
    for j, size in enumerate(group.n):
        idx = rng(seed, j).choice(pts.shape[0], size=int(size), replace=False)
        out[j] = nn_distances(pts[idx]).mean()
    return {"value": out}


# ------------------------------------------------------------- real data


def _plan_realdata(cfg):
    label = {"dataset": cfg["dataset"]}
    return [Group(label, grid_from(cfg["n_grid"]), int(cfg["replicas"]))]


def _realdata_split(cfg, n_max, seed):
    ds = dataset_from(cfg)
    nt = int(cfg["n_test"])
    idx = rng(seed).choice(ds.n, size=n_max + nt, replace=False)
    return ds.points.coords[idx], ds.labels[idx]


def _run_realdata_regress(cfg, group, seed):
    n_max = int(group.n.max())
    x, y = _realdata_split(cfg, n_max, seed)
    kernel = kernel_from(cfg["kernel"])
    L, jitter = cholesky_jitter(gram(kernel, x[:n_max]))
    cross = cross_gram(kernel, x[n_max:], x[:n_max])
    mse = nested_test_errors(L, cross, y[:n_max], y[n_max:], group.n)
    return {"value": mse, "jitter": np.full(group.n.size, jitter)}


def _run_realdata_svm(cfg, group, seed):
    n_max = int(group.n.max())
    x, y = _realdata_split(cfg, n_max, seed)
    kernel = kernel_from(cfg["kernel"])
    K = gram(kernel, x[:n_max])
    out = np.empty(group.n.size)
    for j, n in enumerate(group.n):
        n = int(n)
        if np.all(y[:n] == y[0]):
            # a one-class training set predicts its class everywhere
            out[j] = error_rate(np.full(y.size - n_max, y[0]), y[n_max:])
            continue
        model = train_soft_margin(K[:n, :n], y[:n], float(cfg["C"]), float(cfg["tol"]))
        out[j] = error_rate(classify(model, kernel, x[:n], x[n_max:]), y[n_max:])
    return {"value": out}


# ---------------------------------------------------------------- registry


@dataclass(frozen=True)
class SweepSpec:
    plan: object
    run: object
    theory: object = None
    fit: object = None


SWEEPS = {
    "teacher-student": SweepSpec(_plan_teacher_student, _run_teacher_student, _theory_teacher_student),
    "lattice-mse": SweepSpec(_plan_lattice, _run_lattice, _theory_lattice),
    "kpca": SweepSpec(_plan_kpca, _run_kpca, None, _fit_kpca),
    "appendix-h": SweepSpec(_plan_mode_sum, _run_mode_sum, _theory_mode_sum),
    "effdim": SweepSpec(_plan_effdim, _run_effdim),
    "realdata-regress": SweepSpec(_plan_realdata, _run_realdata_regress),
    "realdata-svm": SweepSpec(_plan_realdata, _run_realdata_svm),
}


def aggregate(group: Group, rows: list) -> LearningCurve:
    """Mean and standard error over replicas; extra columns are averaged."""
    values = np.array([r["value"] for r in rows], dtype=float)
    extra = {}
    for key in rows[0]:
        if key != "value":
            extra[key] = np.mean([np.asarray(r[key], dtype=float) for r in rows], axis=0)
    return LearningCurve.from_replicas(group.n, values, **extra)


def fit_group(command, cfg, group, curve):
    """Default fit of a finished curve; ``None`` when it cannot be fitted."""
    spec = SWEEPS[command]
    window = cfg.get("fit", {}).get("window")
    try:
        if spec.fit is not None:
            return spec.fit(cfg, group, curve)
        ok = curve.value > 0
        return fit_power_law(curve.n[ok], curve.value[ok], tuple(window) if window else None)
    except (ValueError, ArithmeticError):
        return None


def run_group(command, cfg, group_index, replica, seed):
    spec = SWEEPS[command]
    group = spec.plan(cfg)[group_index]
    return spec.run(cfg, group, seed)
