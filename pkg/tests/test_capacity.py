import json
import math

import jsonschema
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from dephasing.capacity import (
    CapacityReport,
    DivergentCapacityWarning,
    capacity_exact,
    capacity_von_mises,
    capacity_wn_approx,
    capacity_wrapped_cauchy,
    capacity_wrapped_normal,
    closed_form_capacity,
    coherent_info_rate,
    convergence_report,
    lossy_dephasing_ub,
    renyi_ub_finite,
)
from dephasing.circular import (
    LOG2_2PI,
    Product,
    Uniform,
    VonMises,
    WrappedCauchy,
    WrappedNormal,
    kl_to_uniform,
    renyi_to_uniform,
)
from dephasing.errors import (
    DivergentEntropyError,
    DomainError,
    InvariantViolation,
    SeriesNonConvergence,
)
from dephasing.specfun import SeriesControl
from dephasing.toeplitz import build_truncation

from conftest import FAMILY_SAMPLES, KAPPA_HALF, KAPPA_ONE_BIT, SCHEMAS

LN2 = math.log(2)

# 30-digit mpmath evaluations of the defining integrals
WN_REFERENCE = {
    0.02: 3.42632863917904004,
    0.1: 2.26536459173535887,
    1.0: 0.611357905745658338,
    5.0: 0.00975340547968222283,
    10.0: 6.54997402880998289e-5,
}
VM_REFERENCE = {
    0.2: 1.67674909744133256,
    1.0: 0.303652115008716159,
    5.0: 0.0143195440330888902,
}


class TestFiniteRates:
    def test_one_level(self):
        t = build_truncation(WrappedNormal(1.0), 1)
        assert coherent_info_rate(t) == 0
        assert renyi_ub_finite(t, 2) == 0

    def test_uniform(self):
        for d in (1, 5, 32):
            assert coherent_info_rate(build_truncation(Uniform(), d)) == 0

    def test_half_kernel(self):
        t = build_truncation(WrappedCauchy(KAPPA_HALF), 2)
        rate = coherent_info_rate(t)
        assert rate == pytest.approx(0.1887218755408671, abs=1e-15)
        assert rate <= math.log2(4 / 3)
        assert renyi_ub_finite(t, 2) == pytest.approx(math.log2(1.25), abs=1e-15)

    @pytest.mark.parametrize("alpha", [1.0, 0.5])
    def test_order_must_exceed_one(self, alpha):
        with pytest.raises(DomainError):
            renyi_ub_finite(build_truncation(Uniform(), 2), alpha)

    def test_renyi_gap_shrinks(self):
        wc = WrappedCauchy(1.0)
        limit = renyi_to_uniform(wc, 2).value
        gaps = [abs(limit - renyi_ub_finite(build_truncation(wc, d), 2)) for d in (64, 128, 256, 512)]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))

    @pytest.mark.parametrize("density", FAMILY_SAMPLES, ids=repr)
    def test_rate_below_capacity(self, density):
        cap = capacity_exact(density)
        for d in (4, 32, 128):
            rate = coherent_info_rate(build_truncation(density, d))
            assert 0 <= rate <= cap + 1e-6


class TestExact:
    def test_uniform(self):
        assert capacity_exact(Uniform()) == 0

    def test_one_bit(self):
        assert capacity_exact(WrappedCauchy(KAPPA_ONE_BIT)) == pytest.approx(1.0, abs=1e-12)
        assert capacity_wrapped_cauchy(KAPPA_ONE_BIT) == pytest.approx(1.0, abs=1e-12)

    def test_product_additive(self):
        a, b = WrappedNormal(0.4), VonMises(2.0)
        assert capacity_exact(Product((a, b))) == pytest.approx(capacity_exact(a) + capacity_exact(b), abs=1e-12)

    def test_divergent_sentinel(self):
        with pytest.warns(DivergentCapacityWarning, match="D_alpha"):
            assert capacity_exact(WrappedCauchy(1e-30), method="quadrature") == math.inf

    @pytest.mark.parametrize("density", FAMILY_SAMPLES, ids=repr)
    def test_bounded_by_renyi(self, density):
        cap = capacity_exact(density)
        assert 0 <= cap <= renyi_to_uniform(density, 1.5).value + 1e-12


class TestWrappedNormal:
    @pytest.mark.parametrize("gamma", sorted(WN_REFERENCE))
    def test_reference(self, gamma):
        assert capacity_wrapped_normal(gamma) == pytest.approx(WN_REFERENCE[gamma], rel=1e-12)

    def test_large_variance_asymptote(self):
        q = math.exp(-10)
        c = capacity_wrapped_normal(10.0)
        # leading term q/ln2; the next order is O(q^2)
        assert abs(c - q / LN2) <= 2 * q * q / LN2
        assert c * LN2 / q == pytest.approx(1 + q / 2, abs=q)

    def test_small_variance_asymptote(self):
        assert capacity_wrapped_normal(0.05) == pytest.approx(0.5 * math.log2(2 * math.pi / (math.e * 0.05)), abs=4e-3)

    @pytest.mark.parametrize("gamma", np.geomspace(0.02, 5, 25))
    def test_series_against_quadrature(self, gamma):
        assert capacity_wrapped_normal(gamma) == pytest.approx(
            capacity_exact(WrappedNormal(gamma), method="quadrature"), abs=1e-7
        )

    def test_below_series_range(self):
        g = 0.01
        c = capacity_wrapped_normal(g)
        assert c == capacity_exact(WrappedNormal(g), method="quadrature")
        assert c == pytest.approx(0.5 * math.log2(2 * math.pi / (math.e * g)), abs=1e-9)
        assert closed_form_capacity(WrappedNormal(g)) == (None, None)

    def test_series_limit(self):
        with pytest.raises(SeriesNonConvergence):
            capacity_wrapped_normal(0.02, SeriesControl(max_terms=1))

    def test_monotone(self):
        vals = [capacity_wrapped_normal(g) for g in np.geomspace(0.02, 20, 60)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("gamma,tol", [(0.01, 1e-4), (1.0, 4e-3), (8.0, 1e-6)])
    def test_approximation(self, gamma, tol):
        assert capacity_wn_approx(gamma) == pytest.approx(capacity_exact(WrappedNormal(gamma)), abs=tol)

    def test_approximation_branches(self):
        assert capacity_wn_approx(0.01) == 0.5 * math.log2(2 * math.pi / (math.e * 0.01))
        q = math.exp(-8)
        assert capacity_wn_approx(8.0) == 2 / LN2 * q - math.log2(1 + q)


class TestVonMises:
    @pytest.mark.parametrize("lam", sorted(VM_REFERENCE))
    def test_reference(self, lam):
        assert capacity_von_mises(lam) == pytest.approx(VM_REFERENCE[lam], rel=1e-12)

    @pytest.mark.parametrize("lam", [0.01, 0.2, 1.0, 30.0])
    def test_against_quadrature(self, lam):
        assert capacity_von_mises(lam) == pytest.approx(
            capacity_exact(VonMises(lam), method="quadrature"), abs=1e-8
        )

    def test_flat_limit(self):
        assert 0 <= capacity_von_mises(1e6) < 1e-6

    def test_ordering(self):
        assert capacity_von_mises(0.2) > capacity_von_mises(1.0)

    def test_huge_concentration(self):
        assert math.isfinite(capacity_von_mises(1e-200))
        with pytest.raises(OverflowError):
            capacity_von_mises(1e-320)

    def test_monotone(self):
        vals = [capacity_von_mises(x) for x in np.geomspace(0.01, 50, 60)]
        assert all(a > b for a, b in zip(vals, vals[1:]))


class TestWrappedCauchy:
    def test_reference(self):
        assert capacity_wrapped_cauchy(1.0) == pytest.approx(0.209787274545919175, rel=1e-14)

    def test_tail(self):
        assert capacity_wrapped_cauchy(100.0) == pytest.approx(math.exp(-20) / LN2, rel=1e-8)

    @pytest.mark.parametrize("kappa", [1e-4, 0.1, 1.0, 9.0])
    def test_against_quadrature(self, kappa):
        assert capacity_wrapped_cauchy(kappa) == pytest.approx(
            capacity_exact(WrappedCauchy(kappa), method="quadrature"), abs=1e-8
        )

    def test_monotone(self):
        vals = [capacity_wrapped_cauchy(k) for k in np.geomspace(1e-3, 50, 60)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    @pytest.mark.parametrize("fn", [capacity_wrapped_cauchy, capacity_von_mises, capacity_wrapped_normal])
    @pytest.mark.parametrize("bad", [0.0, -2.0, math.nan])
    def test_domain(self, fn, bad):
        with pytest.raises(DomainError):
            fn(bad)


class TestLossy:
    def test_examples(self):
        unassisted, assisted = lossy_dephasing_ub(0.9, WrappedCauchy(1.0))
        c = capacity_wrapped_cauchy(1.0)
        assert unassisted == pytest.approx(min(math.log2(9), c))
        assert assisted == pytest.approx(min(-math.log2(0.1), c))

    def test_half_loss_kills_unassisted(self):
        assert lossy_dephasing_ub(0.5, Uniform()) == (0.0, 0.0)
        assert lossy_dephasing_ub(0.5, WrappedNormal(0.01))[0] == 0.0
        assert lossy_dephasing_ub(0.5, WrappedNormal(0.01))[1] == pytest.approx(1.0)

    def test_endpoints(self):
        c = capacity_exact(VonMises(0.3))
        assert lossy_dephasing_ub(1.0, VonMises(0.3)) == (c, c)
        assert lossy_dephasing_ub(0.0, VonMises(0.3)) == (0.0, 0.0)

    @pytest.mark.parametrize("eta", [-0.1, 1.1, math.nan])
    def test_domain(self, eta):
        with pytest.raises(DomainError):
            lossy_dephasing_ub(eta, Uniform())

    @given(st.floats(0, 1), st.sampled_from(FAMILY_SAMPLES))
    def test_ordering(self, eta, density):
        unassisted, assisted = lossy_dephasing_ub(eta, density)
        cap = capacity_exact(density)
        assert 0 <= unassisted <= assisted <= cap


class TestReport:
    def test_uniform(self):
        r = convergence_report(Uniform(), [1, 4, 16], [2.0])
        assert r.exact == 0
        assert all(v == 0 for _, v in r.lower_seq)
        assert all(v == 0 for _, _, v in r.renyi_seq)

    def test_wrapped_cauchy_default_grid(self):
        r = convergence_report(WrappedCauchy(1.0), alpha_grid=[1.5, 2.0])
        lower = [v for _, v in r.lower_seq]
        assert [d for d, _ in r.lower_seq] == [2**j for j in range(1, 10)]
        assert all(a < b for a, b in zip(lower, lower[1:]))
        assert r.exact - lower[-1] < 0.02
        assert r.closed_form == pytest.approx(r.exact, abs=1e-12)
        assert r.closed_form_family == "wrapped-cauchy"
        assert r.renyi_limits[2.0] >= r.renyi_limits[1.5] >= r.exact

    def test_wrapped_normal_sandwich(self):
        r = convergence_report(WrappedNormal(1.0), [64], [2.0])
        (_, lower), ((_, _, renyi),) = r.lower_seq[0], r.renyi_seq
        assert lower <= r.exact <= r.renyi_limits[2.0]
        assert renyi == pytest.approx(r.renyi_limits[2.0], abs=0.05)

    def test_schema(self):
        r = convergence_report(Product((WrappedNormal(1.0), Uniform())), [2, 4], [2.0, 3.0])
        schema = json.loads((SCHEMAS / "capacity_report.schema.json").read_text())
        jsonschema.validate(r.to_dict(), schema)
        assert r.to_dict()["density"]["family"] == "product"

    def test_invariant_check(self):
        with pytest.raises(InvariantViolation):
            CapacityReport(exact=0.5, lower_seq=[(4, 0.7)]).validate()
        with pytest.raises(InvariantViolation):
            CapacityReport(exact=0.5, renyi_limits={2.0: 0.3}).validate()
        CapacityReport(exact=0.5, lower_seq=[(4, 0.5000005)], renyi_limits={2.0: 0.4999995}).validate()

    @pytest.mark.parametrize("d_grid,alphas", [([], [2.0]), ([2], []), ([0], [2.0]), ([2], [1.0])])
    def test_bad_grids(self, d_grid, alphas):
        with pytest.raises(DomainError):
            convergence_report(Uniform(), d_grid, alphas)

    def test_cap(self):
        with pytest.raises(DomainError):
            convergence_report(Product((Uniform(), Uniform())), [100], [2.0])

    def test_divergent(self):
        with pytest.raises(DivergentEntropyError, match="sentinel"):
            convergence_report(WrappedNormal(1e-14), [2], [2.0])

    def test_closed_form_capacity_tags(self):
        assert closed_form_capacity(Uniform()) == (0.0, "uniform")
        val, tag = closed_form_capacity(Product((WrappedCauchy(1.0), VonMises(1.0))))
        assert tag == "product(wrapped-cauchy,von-mises)"
        assert val == pytest.approx(capacity_wrapped_cauchy(1.0) + capacity_von_mises(1.0))


def test_capacity_is_kl():
    d = VonMises(0.7)
    assert capacity_exact(d) == kl_to_uniform(d).value
