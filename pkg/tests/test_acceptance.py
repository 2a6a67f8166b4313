"""Acceptance suite: one test per criterion, numbered ``test_cNN_*``.

Each test attaches a short ``detail`` string (worst observed error); the
terminal summary prints one PASS/FAIL line per criterion.
"""
import itertools
import json

import numpy as np
import pytest
from scipy.special import expit, softmax

from conftest import max_rel_err, random_family, random_theta
from infogeom import (
    ConnectionField,
    ExponentialFamily,
    NotSemisimple,
    PreFrobeniusData,
    SymTensor,
    alpha_connection,
    amari_chentsov,
    curvature,
    density,
    finite_diff,
    fisher_metric,
    fit_ahs,
    geodesic,
    gws_correlator,
    join,
    kl_gradient,
    kl_objective,
    log_partition,
    logistic_flow,
    metric_compatibility_residual,
    monge_ampere_density,
    parallel_transport,
    pc_mul,
    pc_norm,
    potentiality_residual,
    score_matrix,
    semisimple_idempotents,
    split,
    wdvv_residual,
)
from infogeom import cli
from infogeom.paracomplex import E_MINUS, E_PLUS, EPS, ParacomplexNumber

N_FAMILIES = 100


def _families(seed, count=N_FAMILIES):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        fam = random_family(rng)
        yield fam, random_theta(rng, fam)


def test_c01_score_centering(record_property):
    worst = 0.0
    for fam, theta in _families(1):
        p = density(fam, theta).p
        worst = max(worst, float(np.max(np.abs(p @ score_matrix(fam, theta)))))
    record_property("detail", f"max |E[score]| = {worst:.2e}")
    assert worst <= 1e-12


def _shifted_psi(fam, theta):
    """``d -> psi(theta + d) - psi(theta) - d . E_theta[X]``, evaluated without cancellation.

    Derivatives of order >= 2 at ``d = 0`` equal those of ``psi`` at
    ``theta``; its roundoff scales with the cumulants rather than with ``psi``.
    """
    p = softmax(fam.stats @ theta)
    S = fam.stats - p @ fam.stats
    return lambda d: float(np.log1p(p @ np.expm1(S @ d)))


def test_c02_cumulant_ladder(record_property):
    # errors are relative to max(|C_k|, |g|^(k/2)), the natural size of an
    # order-k cumulant; this stays meaningful where C_k itself vanishes
    worst = [0.0, 0.0, 0.0]
    for fam, theta in _families(2):
        f = _shifted_psi(fam, theta)
        zero = np.zeros(fam.n)
        g_scale = float(np.max(np.abs(np.asarray(fisher_metric(fam, theta)))))
        pairs = (
            (fisher_metric(fam, theta), finite_diff(f, zero, 2)),
            (amari_chentsov(fam, theta), finite_diff(f, zero, 3)),
            (gws_correlator(fam, theta, 4), finite_diff(f, zero, 4)),
        )
        for k, (exact, fd) in enumerate(pairs):
            exact = np.asarray(exact)
            scale = max(float(np.max(np.abs(exact))), g_scale ** ((k + 2) / 2))
            worst[k] = max(worst[k], float(np.max(np.abs(np.asarray(fd) - exact))) / scale)
    record_property("detail", "rel err g/T/C4 = " + " / ".join(f"{w:.1e}" for w in worst))
    assert worst[0] <= 1e-5
    assert worst[1] <= 1e-4
    assert worst[2] <= 1e-3


def test_c03_alpha_identity(record_property):
    worst = 0.0
    for fam, theta in _families(3, 50):
        T = np.asarray(amari_chentsov(fam, theta))
        g1 = alpha_connection(fam, theta, 1.0)
        for alpha in (-1.0, 0.0, 0.5, 1.0, 2.0):
            diff = alpha_connection(fam, theta, alpha) - g1 - 0.5 * (1.0 - alpha) * T
            worst = max(worst, float(np.max(np.abs(diff))))
    record_property("detail", f"max defect = {worst:.2e}")
    assert worst <= 1e-12


def test_c04_e_flatness(record_property):
    worst_R = worst_G = 0.0
    for fam, theta in _families(4, 30):
        conn = ConnectionField.from_alpha(fam, 1.0)
        worst_R = max(worst_R, float(np.max(np.abs(curvature(conn, theta).mixed))))
        worst_G = max(worst_G, float(np.max(np.abs(alpha_connection(fam, theta, 1.0)))))
    record_property("detail", f"max |R| = {worst_R:.1e}, max |Gamma^1| = {worst_G:.1e}")
    assert worst_R <= 1e-8
    assert worst_G <= 1e-10


def test_c05_metricity(record_property):
    rng = np.random.default_rng(5)
    worst_res = worst_norm = 0.0
    for _ in range(10):
        fam = random_family(rng)
        theta = random_theta(rng, fam, 1.0)
        conn = ConnectionField.from_alpha(fam, 0.0)
        worst_res = max(worst_res, metric_compatibility_residual(conn, theta))
        path = geodesic(conn, theta, rng.uniform(-0.5, 0.5, fam.n), t_end=1.0, steps=1000)
        w = parallel_transport(conn, path, rng.standard_normal(fam.n))
        norms = [np.asarray(fisher_metric(fam, x)) @ wk @ wk for x, wk in zip(path.points, w)]
        worst_norm = max(worst_norm, float(np.max(np.abs(np.array(norms) - norms[0]))))
    record_property("detail", f"nabla g = {worst_res:.1e}, g(w,w) drift = {worst_norm:.1e}")
    assert worst_res <= 1e-6
    assert worst_norm <= 1e-6


def test_c06_ceva_logistic(record_property):
    sup = 0.0
    for t_end in (5.0, -5.0):
        t, p = logistic_flow(t_end, 1000)
        sup = max(sup, float(np.max(np.abs(p - expit(t)))))
    reference = logistic_flow(5.0, 100_000)[1][-1]
    err_coarse = abs(logistic_flow(5.0, 50)[1][-1] - reference)
    err_fine = abs(logistic_flow(5.0, 100)[1][-1] - reference)
    ratio = err_coarse / err_fine
    record_property("detail", f"sup err = {sup:.1e}, halving ratio = {ratio:.2f}")
    assert sup <= 1e-6
    assert 12.0 <= ratio <= 20.0


def _wdvv_oracle(g, A):
    """Brute-force associativity check through explicit products of basis vectors."""
    n = g.shape[0]
    g_inv = np.linalg.inv(g)

    def prod(u, v):
        lowered = [sum(A[i, j, k] * u[i] * v[j] for i in range(n) for j in range(n)) for k in range(n)]
        return g_inv @ np.array(lowered)

    E = np.eye(n)
    worst = 0.0
    for a, b, c in itertools.product(range(n), repeat=3):
        diff = prod(prod(E[a], E[b]), E[c]) - prod(E[a], prod(E[b], E[c]))
        for d in range(n):
            worst = max(worst, abs(float(g[d] @ diff)))
    return worst


def _random_sym3(rng, n):
    return np.asarray(SymTensor.symmetrized(rng.uniform(-1, 1, (n, n, n))))


def _idempotent_instance(rng, n):
    eta = rng.uniform(0.5, 2.0, n)
    A = np.zeros((n, n, n))
    for i in range(n):
        A[i, i, i] = eta[i]
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    g = Q.T @ np.diag(eta) @ Q
    g = 0.5 * (g + g.T)
    return g, np.asarray(SymTensor.symmetrized(np.einsum("abc,ai,bj,ck->ijk", A, Q, Q, Q)))


def test_c07_wdvv_oracle(record_property):
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(1, 5))
        B = rng.uniform(-1, 1, (n, n))
        g = B @ B.T + n * np.eye(n)
        A = _random_sym3(rng, n)
        data = PreFrobeniusData.constant(g, A)
        worst = max(worst, abs(wdvv_residual(data, np.zeros(n)) - _wdvv_oracle(g, A)))
    g, A = _idempotent_instance(rng, 3)
    idem = wdvv_residual(PreFrobeniusData.constant(g, A), np.zeros(3))
    A_nil = np.zeros((2, 2, 2))
    A_nil[0, 0, 0] = 1.0
    # e_1 o e_1 = e_2 and e_2 is nilpotent
    nilpotent = PreFrobeniusData.constant([[0.0, 1.0], [1.0, 0.0]], A_nil)
    with pytest.raises(NotSemisimple):
        semisimple_idempotents(nilpotent, np.zeros(2))
    record_property("detail", f"oracle gap = {worst:.1e}, idempotent residual = {idem:.1e}, nilpotent -> NotSemisimple")
    assert worst <= 1e-12
    assert idem <= 1e-12


def _quartic(rng, n):
    c3 = _random_sym3(rng, n)
    c4 = rng.uniform(-1, 1, (n,) * 4)

    def phi(x):
        return float(np.sum(x**4) + np.einsum("abc,a,b,c", c3, x, x, x) + np.einsum("abcd,a,b,c,d", c4, x, x, x, x))

    return phi


def test_c08_potentiality(record_property):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(10):
        n = int(rng.integers(1, 4))
        data = PreFrobeniusData.from_potential(np.eye(n), _quartic(rng, n))
        worst = max(worst, potentiality_residual(data, rng.uniform(-1, 1, n)))
    for fam, theta in _families(80, 10):
        data = PreFrobeniusData.from_potential(np.eye(fam.n), lambda t, fam=fam: log_partition(fam, t))
        worst = max(worst, potentiality_residual(data, theta))
        worst = max(worst, potentiality_residual(PreFrobeniusData.statistical(fam, theta), theta))

    def crafted(x):
        A = np.zeros((2, 2, 2))
        A[0, 0, 0] = x[1]
        return A

    bad = potentiality_residual(PreFrobeniusData(np.eye(2), crafted), np.array([0.3, -0.2]))
    record_property("detail", f"potential max = {worst:.1e}, crafted = {bad:.3f}")
    assert worst <= 1e-4
    assert bad >= 0.5


def test_c09_paracomplex(record_property):
    rng = np.random.default_rng(9)
    one = ParacomplexNumber(1.0, 0.0)
    zero = ParacomplexNumber(0.0, 0.0)
    assert EPS * EPS == one
    assert E_PLUS * E_MINUS == zero
    worst_norm = 0.0
    for _ in range(1000):
        a, b, c, d = rng.standard_normal(4) * 10.0 ** rng.integers(-3, 4, 4)
        assert pc_mul(ParacomplexNumber(a, a), ParacomplexNumber(b, -b)) == zero
        z, w = ParacomplexNumber(a, b), ParacomplexNumber(c, d)
        lhs, rhs = pc_norm(z * w), pc_norm(z) * pc_norm(w)
        worst_norm = max(worst_norm, abs(lhs - rhs) / max(1.0, abs(z.x * w.x) + abs(z.y * w.y) + abs(z.x * w.y) + abs(z.y * w.x)) ** 2)
    x = rng.standard_normal(1000) * 10.0 ** rng.integers(-8, 9, 1000)
    y = rng.standard_normal(1000) * 10.0 ** rng.integers(-8, 9, 1000)
    xb, yb = join(split(x, y))
    exact = bool(np.array_equal(xb, x) and np.array_equal(yb, y))
    record_property("detail", f"norm defect = {worst_norm:.1e}, split/join exact = {exact}")
    assert worst_norm <= 1e-10
    assert exact


def test_c10_learning(record_property):
    rng = np.random.default_rng(10)
    worst_res = worst_theta = worst_grad = 0.0
    worst_iter = 0
    for _ in range(20):
        fam = random_family(rng)
        theta0 = random_theta(rng, fam)
        point, trace = fit_ahs(fam, density(fam, theta0), max_iter=5000)
        assert trace.converged
        assert np.all(np.diff(trace.kl_values) <= 0.0)
        worst_iter = max(worst_iter, len(trace) - 1)
        worst_res = max(worst_res, float(trace.moment_residuals[-1]))
        worst_theta = max(worst_theta, float(np.max(np.abs(point.theta - theta0))))
        target = rng.dirichlet(np.ones(fam.m))
        theta = random_theta(rng, fam)
        fd = np.asarray(finite_diff(lambda t: kl_objective(fam, t, target), theta, 1))
        worst_grad = max(worst_grad, float(np.max(np.abs(kl_gradient(fam, theta, target) - fd))))
    record_property(
        "detail",
        f"residual = {worst_res:.1e}, |theta err| = {worst_theta:.1e}, grad vs FD = {worst_grad:.1e}, iters <= {worst_iter}",
    )
    assert worst_res <= 1e-8
    assert worst_theta <= 1e-6
    assert worst_grad <= 1e-6


def test_c11_monge_ampere(record_property):
    smallest = min(monge_ampere_density(fam, theta) for fam, theta in _families(11))
    bern = ExponentialFamily.from_stats([[1.0], [0.0]])
    value = monge_ampere_density(bern, [0.0])
    record_property("detail", f"min det = {smallest:.2e}, Bernoulli = {value!r}")
    assert smallest > 0
    assert abs(value - 0.25) <= 1e-10


def _run(capsys, *argv):
    code = cli.main(list(argv))
    return code, json.loads(capsys.readouterr().out)


def test_c12_cli_conformance(capsys, tmp_path, record_property):
    bern = cli.parse_model("bernoulli.json")
    code, doc = _run(capsys, "metric", "--model", "bernoulli.json", "--theta", "0")
    assert code == 0
    assert doc["result"]["g"] == np.asarray(fisher_metric(bern, [0.0])).tolist()
    fd = finite_diff(lambda t: log_partition(bern, t), np.zeros(1), 2)
    assert max_rel_err(fd, doc["result"]["g"]) <= 1e-5

    t = float(np.log(3.0))
    code, doc = _run(capsys, "ceva", "--m", "2", "--t", repr(t))
    assert code == 0
    assert doc["result"]["p_vertex_rk4"] == logistic_flow(t, 1000)[1][-1]
    assert abs(doc["result"]["p_vertex_rk4"] - 0.75) <= 1e-6
    assert abs(doc["result"]["p"][0] - 0.75) <= 1e-12

    code, doc = _run(capsys, "fit", "--model", "bernoulli.json", "--target", "0.75,0.25")
    assert code == 0
    point, trace = fit_ahs(bern, [0.75, 0.25])
    assert doc["result"]["theta"] == point.theta.tolist()
    assert doc["result"]["moment_residual"] == trace.moment_residuals[-1] <= 1e-8
    assert abs(doc["result"]["theta"][0] - t) <= 1e-6

    bad = tmp_path / "bad.json"
    bad.write_text('{"omega": ["H", "T"], "stats": [[1], [0]')
    code, doc = _run(capsys, "metric", "--model", str(bad))
    record_property("detail", f"metric/ceva/fit match library; malformed -> exit {code} {doc['error']['code']}")
    assert code == 2
    assert doc["error"]["code"] == "ParseError"
