import numpy as np
import pytest

from parabolic_control import control as ctl
from parabolic_control import operators as ops
from parabolic_control import oracle as orc
from parabolic_control import rational as rat
from parabolic_control import symbols as sym

from conftest import make_spec_51, T_1D, ALPHA


# ---------------------------------------------------------------------------
# problem validation
# ---------------------------------------------------------------------------

def test_problem_spec_validation(op20):
    w = op20.function(np.ones(op20.n))
    with pytest.raises(ValueError):
        ctl.ProblemSpec(T=0.01, alpha=0.0, beta_segments=((0, 0.01, 1.0),),
                        w_segments=(w,), ystar=w, eps=0.1)
    with pytest.raises(ValueError):
        ctl.ProblemSpec(T=0.01, alpha=1e-4, beta_segments=((0, 0.005, -1.0), (0.005, 0.01, 1.0)),
                        w_segments=(w, w), ystar=w, eps=0.1)
    with pytest.raises(ValueError):
        ctl.ProblemSpec(T=0.01, alpha=1e-4, beta_segments=((0, 0.004, 1.0), (0.005, 0.01, 1.0)),
                        w_segments=(w, w), ystar=w, eps=0.1)


# ---------------------------------------------------------------------------
# homogenization
# ---------------------------------------------------------------------------

def test_homogeneous_source_is_identity(op62, hd62):
    spec = make_spec_51(op62, 0.5)
    assert np.array_equal(hd62.ystar_hom.values, spec.ystar.values)
    for wh, w in zip(hd62.w_hom, spec.w_segments):
        assert np.array_equal(wh.values, w.values)


def test_constant_source_matches_resolvent_formula(op64):
    # int_0^T S_tau f dtau = A^{-1}(S_T - I) f, checked on dense eigenpairs
    ds = orc.decompose(op64)
    lam = ds.eigenvalues
    rng = np.random.default_rng(21)
    f = op64.function(rng.standard_normal(op64.n))
    got = ctl.source_integral(op64, ((0.0, T_1D, f),), T_1D).values
    want = ds.from_eig((np.expm1(T_1D * lam) / lam) * ds.to_eig(f)).values
    assert ops.norm_m(op64, got - want) <= 1e-8 * ops.norm_m(op64, want)


def test_zero_trajectory_gives_zero_psi(op20):
    z = op20.function(np.zeros(op20.n))
    spec = ctl.ProblemSpec(
        T=T_1D, alpha=ALPHA,
        beta_segments=((0.0, T_1D / 3, 0.0), (T_1D / 3, 2 * T_1D / 3, 1.0),
                       (2 * T_1D / 3, T_1D, 0.0)),
        w_segments=(z, z, z), ystar=op20.function(np.ones(op20.n)), eps=0.5)
    hd = ctl.homogenize(spec, op20)
    assert np.all(hd.psi.values == 0.0)


def test_psi_symbol_dominates_alpha(hd62):
    lam = -np.logspace(-8, 7, 300)
    vals = np.asarray(hd62.big_psi_symbol(np.concatenate([lam, [0.0]])))
    assert np.all(vals >= ALPHA)


def test_dimension_mismatch_rejected(op20, op62):
    spec = make_spec_51(op62, 0.5)
    with pytest.raises(ops.DimensionError):
        ctl.homogenize(spec, op20)


# ---------------------------------------------------------------------------
# unconstrained minimizer
# ---------------------------------------------------------------------------

def test_u_min_zero_psi(op20):
    z = op20.function(np.zeros(op20.n))
    spec = ctl.ProblemSpec(
        T=T_1D, alpha=ALPHA,
        beta_segments=((0.0, T_1D, 1.0),), w_segments=(z,),
        ystar=op20.function(np.ones(op20.n)), eps=0.5)
    hd = ctl.homogenize(spec, op20)
    assert np.all(ctl.u_min(hd, op20).values == 0.0)


def test_u_min_reduces_to_psi_over_alpha(op20):
    # with beta = 0 the gradient data is Psi = alpha*I: u_min = psi/alpha
    rng = np.random.default_rng(22)
    psi_vec = rng.standard_normal(op20.n)
    hd = ctl.HomogenizedData(
        spec=None, op=op20, ystar_hom=op20.function(np.zeros(op20.n)),
        w_hom=(), psi=op20.function(psi_vec), psi_symbol_terms=(),
        big_psi_symbol=sym.const(ALPHA))
    got = ctl.u_min(hd, op20).values
    assert np.allclose(got, psi_vec / ALPHA, rtol=1e-10)


def test_u_min_matches_oracle(op64, hd64):
    ds = orc.decompose(op64)
    lam = ds.eigenvalues
    big = np.asarray(hd64.big_psi_symbol(lam))
    want = ds.from_eig(ds.to_eig(hd64.psi) / big).values
    got = ctl.u_min(hd64, op64).values
    assert ops.norm_m(op64, got - want) <= 1e-8 * ops.norm_m(op64, want)


# ---------------------------------------------------------------------------
# Phi and the root find
# ---------------------------------------------------------------------------

def test_phi0_matches_paper_value(phi0_62):
    assert abs(phi0_62 - 1.0374) / 1.0374 <= 0.02


def test_phi_zero_data(op20):
    z = op20.function(np.zeros(op20.n))
    spec = ctl.ProblemSpec(
        T=T_1D, alpha=ALPHA,
        beta_segments=((0.0, T_1D, 1.0),), w_segments=(z,), ystar=z, eps=0.5)
    hd = ctl.homogenize(spec, op20)
    for mu in (0.0, 1.0, 1e6):
        assert ctl.phi(hd, op20, mu) == 0.0


def test_phi_strictly_decreasing(hd62, op62):
    mus = np.concatenate([[0.0], np.logspace(-7, 12, 20)])
    vals = [ctl.phi(hd62, op62, m) for m in mus]
    for a, b in zip(vals, vals[1:]):
        assert b < a


def test_phi_rejects_negative_mu(hd62, op62):
    with pytest.raises(ValueError):
        ctl.phi(hd62, op62, -1.0)


def test_solve_mu_boundary_case(hd62, op62, phi0_62):
    assert ctl.solve_mu(hd62, op62, phi0_62) == 0.0
    assert ctl.solve_mu(hd62, op62, 2.0 * phi0_62) == 0.0


def test_solve_mu_matches_bisection_oracle(hd62, op62, phi0_62):
    eps = 0.5 * phi0_62
    mu = ctl.solve_mu(hd62, op62, eps)
    assert abs(ctl.phi(hd62, op62, mu) - eps) <= 1e-8 * phi0_62
    # fine bisection on the same Phi
    lo, hi = 0.0, 1.0
    while ctl.phi(hd62, op62, hi) >= eps:
        hi *= 10
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        if ctl.phi(hd62, op62, mid) >= eps:
            lo = mid
        else:
            hi = mid
    assert mu == pytest.approx(0.5 * (lo + hi), rel=1e-9)


def test_mu_monotone_in_eps(hd62, op62, phi0_62):
    mus = [ctl.solve_mu(hd62, op62, f * phi0_62) for f in (0.2, 0.5, 0.9)]
    assert mus[0] > mus[1] > mus[2] >= 0.0


# ---------------------------------------------------------------------------
# optimal control
# ---------------------------------------------------------------------------

def test_optimal_control_reduces_to_umin_at_zero(hd62, op62):
    u0 = ctl.optimal_control(hd62, op62, 0.0)
    um = ctl.u_min(hd62, op62)
    scale = ops.norm_m(op62, um)
    assert ops.norm_m(op62, u0.values - um.values) <= 1e-10 * scale


def test_optimal_control_zero_data(op20):
    z = op20.function(np.zeros(op20.n))
    spec = ctl.ProblemSpec(
        T=T_1D, alpha=ALPHA,
        beta_segments=((0.0, T_1D, 1.0),), w_segments=(z,), ystar=z, eps=0.5)
    hd = ctl.homogenize(spec, op20)
    assert np.all(ctl.optimal_control(hd, op20, 0.0).values == 0.0)
    assert ops.norm_m(op20, ctl.optimal_control(hd, op20, 1.0)) <= 1e-14


def test_optimal_control_matches_oracle_at_mu_one(op64, hd64):
    ds = orc.decompose(op64)
    lam = ds.eigenvalues
    big = np.asarray(hd64.big_psi_symbol(lam))
    mu = 1.0
    denom = mu * np.exp(2 * T_1D * lam) + big
    want = ds.from_eig((mu * np.exp(T_1D * lam) * ds.to_eig(hd64.ystar_hom)
                        + ds.to_eig(hd64.psi)) / denom).values
    got = ctl.optimal_control(hd64, op64, mu).values
    assert ops.norm_m(op64, got - want) <= 1e-8 * ops.norm_m(op64, want)


# ---------------------------------------------------------------------------
# trajectory and cost
# ---------------------------------------------------------------------------

def test_trajectory_endpoints(op62, hd62):
    spec = make_spec_51(op62, 0.5)
    u = ctl.u_min(hd62, op62)
    snaps = ctl.trajectory(spec, op62, u, [0.0, spec.T])
    assert np.array_equal(snaps[0].values, u.values)
    want = rat.semigroup_apply(op62, spec.T, u)
    assert np.array_equal(snaps[1].values, want.values)


def test_final_state_on_ball_boundary(op62, hd62, phi0_62):
    spec = make_spec_51(op62, 0.2 * phi0_62)
    sol = ctl.solve_problem(spec, op62, hd=hd62)
    assert abs(sol.final_miss - spec.eps) <= 1e-6 * phi0_62


def test_cost_zero_for_zero_data(op20):
    z = op20.function(np.zeros(op20.n))
    spec = ctl.ProblemSpec(
        T=T_1D, alpha=ALPHA,
        beta_segments=((0.0, T_1D, 1.0),), w_segments=(z,), ystar=z, eps=0.5)
    assert ctl.cost_j(spec, op20, z) == 0.0


def test_cost_agrees_with_bilinear_form(op64, hd64):
    # J(u) = 1/2 <Psi u, u> - <psi, u> + 1/2 sum beta_i |seg_i| ||w_i||^2,
    # the gradient expansion, evaluated exactly on the dense eigenpairs
    ds = orc.decompose(op64)
    lam = ds.eigenvalues
    spec = make_spec_51(op64, 0.5)
    rng = np.random.default_rng(23)
    u = op64.function(rng.standard_normal(op64.n))
    u_hat = ds.to_eig(u)
    big = np.asarray(hd64.big_psi_symbol(lam))
    quad = 0.5 * float(np.sum(big * u_hat**2)) \
        - float(np.sum(ds.to_eig(hd64.psi) * u_hat))
    const = 0.0
    for (a, b, beta), w in zip(spec.beta_segments, spec.w_segments):
        const += 0.5 * beta * (b - a) * ops.norm_m(op64, w) ** 2
    want = quad + const
    got = ctl.cost_j(spec, op64, u)
    assert abs(got - want) <= 1e-6 * abs(want)


def test_optimality_of_cost(op62, hd62, phi0_62):
    spec = make_spec_51(op62, 0.5 * phi0_62)
    sol = ctl.solve_problem(spec, op62, hd=hd62)
    umin = ctl.u_min(hd62, op62)
    j_min = ctl.cost_j(spec, op62, umin)
    assert j_min <= sol.cost + 1e-12
    # strictly feasible interior point to mix with
    u_inner = ctl.optimal_control(hd62, op62, 4.0 * sol.mu_eps)
    rng = np.random.default_rng(24)
    tested = 0
    for _ in range(30):
        s = rng.uniform(0.05, 1.0)
        d = rng.standard_normal(op62.n)
        d *= 0.01 * s / ops.norm_m(op62, d)
        u_try = op62.function((1 - s) * sol.u_opt.values
                              + s * u_inner.values + d)
        y_try = ctl.trajectory(spec, op62, u_try, [spec.T])[0]
        if ops.norm_m(op62, y_try.values - spec.ystar.values) <= spec.eps:
            assert ctl.cost_j(spec, op62, u_try) >= sol.cost - 1e-10
            tested += 1
        if tested == 10:
            break
    assert tested == 10


# ---------------------------------------------------------------------------
# KKT residual
# ---------------------------------------------------------------------------

def test_kkt_at_solution(op62, hd62, phi0_62):
    spec = make_spec_51(op62, 0.5 * phi0_62)
    sol = ctl.solve_problem(spec, op62, hd=hd62)
    assert sol.kkt <= 1e-6


def test_kkt_at_umin(op62, hd62):
    umin = ctl.u_min(hd62, op62)
    assert ctl.kkt_residual(hd62, op62, umin, 0.0) <= 1e-8


def test_kkt_increases_away_from_solution(op62, hd62, phi0_62):
    spec = make_spec_51(op62, 0.5 * phi0_62)
    sol = ctl.solve_problem(spec, op62, hd=hd62)
    umin = ctl.u_min(hd62, op62)
    perturbed = op62.function(umin.values + 0.01)
    at_sol = ctl.kkt_residual(hd62, op62, sol.u_opt, sol.mu_eps)
    at_pert = ctl.kkt_residual(hd62, op62, perturbed, sol.mu_eps)
    assert at_pert > at_sol


# ---------------------------------------------------------------------------
# the Phi-law suite and regime invariants
# ---------------------------------------------------------------------------

def test_phi_limit_large_mu(hd62, op62, phi0_62):
    assert ctl.phi(hd62, op62, 1e12) <= 1e-3 * phi0_62


def test_phi0_equals_unconstrained_miss(op62, hd62, phi0_62):
    spec = make_spec_51(op62, 0.5)
    umin = ctl.u_min(hd62, op62)
    y_min = ctl.trajectory(spec, op62, umin, [spec.T])[0]
    miss = ops.norm_m(op62, y_min.values - spec.ystar.values)
    assert abs(miss - phi0_62) <= 1e-8 * phi0_62


def test_feasibility_and_complementarity_all_regimes(op62, hd62, phi0_62):
    for frac in (0.5, 1.2):
        spec = make_spec_51(op62, frac * phi0_62)
        sol = ctl.solve_problem(spec, op62, hd=hd62)
        assert sol.final_miss <= spec.eps + 1e-6 * phi0_62
        scale = max(1.0, sol.mu_eps)
        assert sol.mu_eps * abs(sol.final_miss - spec.eps) <= 1e-6 * scale
        if frac > 1:
            assert sol.mu_eps == 0.0


def test_eps_interpolation(op62, hd62, phi0_62):
    umin = ctl.u_min(hd62, op62)
    umin_n = ops.norm_m(op62, umin)
    costs, dists = [], []
    for frac in (0.2, 0.5, 0.9):
        spec = make_spec_51(op62, frac * phi0_62)
        sol = ctl.solve_problem(spec, op62, hd=hd62)
        costs.append(sol.cost)
        dists.append(ops.norm_m(op62, sol.u_opt.values - umin.values) / umin_n)
    assert costs[0] >= costs[1] >= costs[2]
    assert dists[0] >= dists[1] >= dists[2]


def test_solution_invariants(op62, hd62, phi0_62):
    spec = make_spec_51(op62, 0.5 * phi0_62)
    sol = ctl.solve_problem(spec, op62, hd=hd62)
    assert sol.mu_eps > 0
    assert abs(sol.final_miss - spec.eps) <= 1e-6 * phi0_62
    assert sol.phi0 == pytest.approx(phi0_62)
    mus = [m for m, _ in sol.phi_samples]
    assert mus == sorted(mus)
