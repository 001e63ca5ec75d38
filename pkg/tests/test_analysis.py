"""Decoding, certification, and frequency reporting."""

import itertools
import json
from fractions import Fraction as F

import pytest

from nashqubo.analysis import (
    DecodedSolution,
    FrequencyReport,
    NashCertificate,
    certify,
    decode,
    encode_assignment,
    histogram,
    iter_feasible_assignments,
)
from nashqubo.errors import CertificationError, DimensionError, ParameterError
from nashqubo.games import PureProfile, payoff, pure_nash_enumerate
from nashqubo.qp import add_slacks, build_qp, integerize
from nashqubo.qubo import PenaltyConfig, compile_qubo, derive_bounds, energy
from nashqubo.samplers import sample_sa, solve_exhaustive


def bundle(game, mode="per-row"):
    """Compile a game and hand back (slacked program, model)."""
    slacked = add_slacks(integerize(build_qp(game))[0], mode=mode)
    encodings = {e.name: e for e in derive_bounds(slacked)}
    penalties = PenaltyConfig.uniform(len(slacked.rows_p1), len(slacked.rows_p2))
    return slacked, compile_qubo(slacked, encodings, penalties)


NE_11 = (1, 1, 0, 0, 1, 1, 0, 1, 0, 0, 1, 1, 0, 0, 0, 1)
NE_22 = (0, 0, 1, 1, 0, 1, 1, 1, 0, 1, 0, 0, 1, 1, 0, 0)
# zero energy but one slack row off by one, so not feasible
BALANCED = (0, 0, 1, 1, 0, 1, 0, 1, 0, 1, 0, 0, 0, 1, 0, 0)


class TestDecode:
    def test_equilibrium_assignment(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes)
        d = decode(model, NE_11, program)
        assert d.profile == PureProfile(1, 1)
        assert d.one_hot
        assert d.alpha == F(2)
        assert d.beta == F(1)
        assert d.slacks == {"zeta1": F(0), "zeta2": F(3), "eta1": F(0), "eta2": F(2)}
        assert d.residuals_p1 == (F(0), F(0))
        assert d.residuals_p2 == (F(0), F(0))
        assert d.feasible is True

    def test_balanced_state_is_not_feasible(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes)
        assert energy(model, BALANCED) == 0
        d = decode(model, BALANCED, program)
        assert d.profile == PureProfile(2, 2)
        assert d.feasible is False
        assert d.residuals_p2 == (F(0), F(1))

    def test_non_one_hot(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes)
        bits = list(NE_11)
        bits[0] = 0  # clear the only selected strategy of the first player
        d = decode(model, tuple(bits), program)
        assert d.profile is None
        assert not d.one_hot
        assert d.feasible is False

    def test_without_program_feasibility_is_unknown(self, battle_of_the_sexes):
        _, model = bundle(battle_of_the_sexes)
        d = decode(model, NE_11)
        assert d.residuals_p1 is None
        assert d.residuals_p2 is None
        assert d.feasible is None
        # but a broken one-hot structure is conclusive on its own
        bits = list(NE_11)
        bits[0] = 0
        assert decode(model, tuple(bits)).feasible is False

    def test_bit_vectors_exposed(self, battle_of_the_sexes):
        _, model = bundle(battle_of_the_sexes)
        d = decode(model, NE_22)
        assert d.p_bits == (0, 1)
        assert d.q_bits == (0, 1)

    def test_input_validation(self, battle_of_the_sexes):
        _, model = bundle(battle_of_the_sexes)
        with pytest.raises(DimensionError):
            decode(model, (0, 1))
        with pytest.raises(ParameterError):
            decode(model, (2,) * model.n_vars)

    def test_model_without_varmap_rejected(self):
        from nashqubo.qubo import QuboModel

        bare = QuboModel.from_terms(
            n_vars=2, linear={0: F(1)}, quadratic={}, offset=F(0)
        )
        with pytest.raises(ParameterError):
            decode(bare, (0, 0))


class TestEncodeAssignment:
    def test_explicit_slacks_reproduce_known_bits(self, battle_of_the_sexes):
        _, model = bundle(battle_of_the_sexes)
        bits = encode_assignment(
            model,
            profile=PureProfile(1, 1),
            alpha=F(2),
            beta=F(1),
            slacks={"zeta1": 0, "zeta2": 3, "eta1": 0, "eta2": 2},
        )
        assert bits == NE_11

    def test_slacks_derived_from_program(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes)
        bits = encode_assignment(
            model, profile=PureProfile(2, 2), alpha=F(1), beta=F(2), program=program
        )
        assert bits == NE_22
        assert decode(model, bits, program).feasible is True

    def test_decode_inverts_encode(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes)
        d = decode(model, NE_22, program)
        assert (
            encode_assignment(
                model,
                profile=d.profile,
                alpha=d.alpha,
                beta=d.beta,
                slacks=d.slacks,
            )
            == NE_22
        )

    def test_out_of_range_scalar_rejected(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes)
        with pytest.raises(ParameterError):
            encode_assignment(
                model, profile=PureProfile(1, 1), alpha=F(17), beta=F(1), program=program
            )

    def test_negative_required_slack_rejected(self, battle_of_the_sexes):
        # alpha below the payoff of a playable deviation cannot be slacked
        program, model = bundle(battle_of_the_sexes)
        with pytest.raises(ParameterError):
            encode_assignment(
                model, profile=PureProfile(1, 1), alpha=F(-1), beta=F(1), program=program
            )

    def test_shared_slack_conflict_rejected(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes, mode="paper-compat")
        with pytest.raises(ParameterError):
            encode_assignment(
                model, profile=PureProfile(1, 1), alpha=F(2), beta=F(1), program=program
            )

    def test_profile_bounds_checked(self, battle_of_the_sexes):
        _, model = bundle(battle_of_the_sexes)
        with pytest.raises(ParameterError):
            encode_assignment(
                model, profile=PureProfile(3, 1), alpha=F(2), beta=F(1), slacks={}
            )


class TestIterFeasible:
    def test_zero_energy_feasible_set_matches_oracle(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes)
        oracle = set(pure_nash_enumerate(battle_of_the_sexes))
        zero_profiles = set()
        for bits in iter_feasible_assignments(program, model):
            d = decode(model, bits, program)
            assert d.feasible is True
            assert energy(model, bits) >= 0
            if energy(model, bits) == 0:
                zero_profiles.add(d.profile)
                pay = payoff(battle_of_the_sexes, d.profile)
                assert (d.alpha, d.beta) == (pay.first, pay.second)
        assert zero_profiles == oracle

    def test_matches_brute_force_filter_in_shared_mode(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes, mode="paper-compat")
        generated = set(iter_feasible_assignments(program, model))
        brute = {
            bits
            for bits in itertools.product((0, 1), repeat=model.n_vars)
            if decode(model, bits, program).feasible
        }
        assert generated == brute
        # the shared slack cannot close every row at once for this game
        assert all(energy(model, bits) > 0 for bits in generated)

    def test_no_equilibrium_game_has_no_zero_energy_feasible_state(
        self, matching_pennies
    ):
        program, model = bundle(matching_pennies)
        energies = [
            energy(model, bits)
            for bits in iter_feasible_assignments(program, model)
        ]
        assert energies
        assert min(energies) > 0


class TestCertify:
    def test_equilibrium_certificate(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes)
        cert = certify(battle_of_the_sexes, decode(model, NE_11, program))
        assert cert.is_nash is True
        assert cert.profile == PureProfile(1, 1)
        assert cert.scalars_match is True
        assert cert.objective_value == 0
        assert cert.payoffs.first == F(2)
        assert cert.payoffs.second == F(1)

    def test_feasible_non_equilibrium_is_flagged_not_refused(
        self, battle_of_the_sexes
    ):
        program, model = bundle(battle_of_the_sexes)
        bits = encode_assignment(
            model, profile=PureProfile(1, 2), alpha=F(1), beta=F(1), program=program
        )
        cert = certify(battle_of_the_sexes, decode(model, bits, program))
        assert cert.is_nash is False
        assert cert.objective_value == F(-4)

    def test_infeasible_input_refused(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes)
        with pytest.raises(CertificationError):
            certify(battle_of_the_sexes, decode(model, BALANCED, program))

    def test_non_one_hot_refused(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes)
        bits = list(NE_11)
        bits[0] = 0
        with pytest.raises(CertificationError):
            certify(battle_of_the_sexes, decode(model, tuple(bits), program))

    def test_unknown_feasibility_refused(self, battle_of_the_sexes):
        _, model = bundle(battle_of_the_sexes)
        with pytest.raises(CertificationError):
            certify(battle_of_the_sexes, decode(model, NE_11))

    def test_objective_scale_reported(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes)
        cert = certify(
            battle_of_the_sexes,
            decode(model, NE_11, program),
            objective_scale=F(3),
        )
        assert cert.objective_scale == F(3)
        assert cert.scaled_objective == F(0)


class TestHistogram:
    def test_exhaustive_ground_state_buckets(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes)
        result = solve_exhaustive(model)
        report = histogram(battle_of_the_sexes, result, program)
        assert report.total_occurrences == len(result.records)
        assert sum(row.occurrences for row in report.rows) == report.total_occurrences
        nash_buckets = {row.profile for row in report.rows if row.is_nash}
        assert nash_buckets == {PureProfile(1, 1), PureProfile(2, 2)}
        for row in report.rows:
            assert row.min_energy == 0
            if row.is_nash:
                # one slack-perfect encoding per equilibrium in the zero tier
                assert row.feasible_occurrences == 1
            elif row.profile is None:
                assert row.is_nash is None

    def test_rows_sorted_by_occurrences(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes)
        report = histogram(
            battle_of_the_sexes, sample_sa(model, reads=100, seed=3), program
        )
        assert report.total_occurrences == 100
        counts = [row.occurrences for row in report.rows]
        assert counts == sorted(counts, reverse=True)
        assert sum(row.share for row in report.rows) == 1

    def test_without_program_feasible_counts_absent(self, battle_of_the_sexes):
        _, model = bundle(battle_of_the_sexes)
        report = histogram(battle_of_the_sexes, solve_exhaustive(model))
        assert all(row.feasible_occurrences is None for row in report.rows)

    def test_infeasible_bucket_never_suppressed(self, matching_pennies):
        program, model = bundle(matching_pennies)
        result = solve_exhaustive(model)
        report = histogram(matching_pennies, result, program)
        buckets = {row.profile for row in report.rows}
        # the ground tier of this game holds states that are not one-hot
        assert None in buckets
        infeasible = next(row for row in report.rows if row.profile is None)
        assert infeasible.is_nash is None
        assert infeasible.occurrences >= 1

    def test_csv_deterministic_and_parseable(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes)
        a = histogram(battle_of_the_sexes, solve_exhaustive(model), program)
        b = histogram(battle_of_the_sexes, solve_exhaustive(model), program)
        assert a.to_csv() == b.to_csv()
        lines = a.to_csv().splitlines()
        assert lines[0] == "row,col,occurrences,share,min_energy,is_nash,feasible_occurrences"
        assert len(lines) == len(a.rows) + 1

    def test_payload_is_json_ready(self, battle_of_the_sexes):
        program, model = bundle(battle_of_the_sexes)
        report = histogram(battle_of_the_sexes, solve_exhaustive(model), program)
        payload = report.to_payload()
        text = json.dumps(payload, indent=2)
        parsed = json.loads(text)
        assert parsed["game"] == battle_of_the_sexes.name
        assert parsed["total_occurrences"] == report.total_occurrences
        assert len(parsed["rows"]) == len(report.rows)
