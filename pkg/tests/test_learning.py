import numpy as np
import pytest

from mmgame.learning import (
    LearningRateSchedule,
    decode_joint_state,
    encode_joint_state,
    greedy_policy,
    make_agent,
    select_action,
    update_stateless,
    update_with_memory,
)

TABLE4_Q = [0.0783, 0.1270, 0.1421, 0.1324, 0.1114, 0.0876, 0.0646, 0.0436, 0.0247, 0.0080]


class TestSchedule:
    def test_harmonic_rates(self):
        s = LearningRateSchedule("harmonic", 1e4)
        assert s.rate(0) == 1.0
        assert s.rate(10_000) == 0.5
        assert s.rate(10**8) < 1e-3

    def test_constant_rate(self):
        s = LearningRateSchedule("constant", 0.25)
        assert s.rate(0) == s.rate(999) == 0.25

    def test_validation(self):
        with pytest.raises(ValueError):
            LearningRateSchedule("harmonic", 0.0)
        with pytest.raises(ValueError):
            LearningRateSchedule("constant", 1.5)
        with pytest.raises(ValueError):
            LearningRateSchedule("linear", 0.1)


class TestSelectAction:
    def test_uniform_when_values_equal(self):
        agent = make_agent(4, temperature=0.1)
        rng = np.random.default_rng(0)
        counts = np.bincount(
            [select_action(agent, 0, rng) for _ in range(200_000)], minlength=4
        )
        p = counts / counts.sum()
        sigma = np.sqrt(0.25 * 0.75 / counts.sum())
        assert np.abs(p - 0.25).max() < 3 * sigma

    def test_two_point_frequencies(self):
        agent = make_agent(2, temperature=0.1, q0=(1.0, 0.0))
        rng = np.random.default_rng(1)
        n = 1_000_000
        hits = sum(select_action(agent, 0, rng) == 0 for _ in range(n))
        target = 1.0 / (1.0 + np.exp(-10.0))
        sigma = np.sqrt(target * (1 - target) / n)
        assert hits / n == pytest.approx(target, abs=3 * sigma)

    def test_seeded_rng_reproduces_sequence(self):
        agent = make_agent(5, temperature=0.3, q0=(0.1, 0.5, 0.2, 0.0, 0.4))
        rng_a = np.random.default_rng(123)
        rng_b = np.random.default_rng(123)
        a = [select_action(agent, 0, rng_a) for _ in range(500)]
        b = [select_action(agent, 0, rng_b) for _ in range(500)]
        assert a == b


class TestUpdates:
    def test_zero_rate_is_identity(self):
        agent = make_agent(3, temperature=0.1, q0=(0.1, 0.2, 0.3),
                           schedule=LearningRateSchedule("constant", 0.0))
        before = agent.q.copy()
        update_stateless(agent, 1, 5.0)
        np.testing.assert_array_equal(agent.q, before)
        assert agent.t == 1

    def test_full_overwrite(self):
        agent = make_agent(3, temperature=0.1,
                           schedule=LearningRateSchedule("constant", 1.0))
        update_stateless(agent, 2, 0.7)
        assert agent.q[0, 2] == 0.7

    def test_update_locality(self, rng):
        agent = make_agent(6, temperature=0.1, n_states=4, gamma=0.5)
        for _ in range(200):
            before = agent.q.copy()
            s, a, ns = rng.integers(0, 4), rng.integers(0, 6), rng.integers(0, 4)
            update_with_memory(agent, s, a, float(rng.normal()), ns)
            diff = np.argwhere(agent.q != before)
            assert len(diff) <= 1
            if len(diff):
                assert tuple(diff[0]) == (s, a)

    def test_constant_reward_convergence(self):
        # harmonic schedule starts at rate one, so the first update is exact
        agent = make_agent(2, temperature=0.1, schedule=LearningRateSchedule("harmonic", 1e4))
        for _ in range(10_000):
            update_stateless(agent, 0, 0.37)
        assert agent.q[0, 0] == pytest.approx(0.37, abs=1e-3)

    def test_noisy_reward_averaging(self):
        # iid rewards with mean 0.25: compare against the explicit
        # weight expansion q_T = sum_i w_i r_i of the same recursion
        rng = np.random.default_rng(5)
        rewards = 0.25 + rng.uniform(-0.05, 0.05, size=100_000)
        agent = make_agent(1, temperature=0.1, schedule=LearningRateSchedule("harmonic", 100.0))
        for r in rewards:
            update_stateless(agent, 0, float(r))
        alphas = 100.0 / (100.0 + np.arange(len(rewards)))
        weights = alphas * np.append(np.cumprod((1 - alphas)[::-1])[-2::-1], 1.0)
        assert agent.q[0, 0] == pytest.approx(float(weights @ rewards), abs=1e-12)
        sigma = 0.05 / np.sqrt(3)  # uniform(-0.05, 0.05) noise
        band = 4 * sigma * np.sqrt(100.0 / len(rewards))
        assert agent.q[0, 0] == pytest.approx(0.25, abs=band)

    def test_boundedness(self, rng):
        agent = make_agent(4, temperature=0.1, gamma=0.6,
                           schedule=LearningRateSchedule("harmonic", 50.0))
        r_min, r_max = -0.3, 0.8
        for _ in range(5_000):
            a = int(rng.integers(0, 4))
            update_stateless(agent, a, float(rng.uniform(r_min, r_max)))
        lo, hi = min(0, r_min) / (1 - 0.6), max(0, r_max) / (1 - 0.6)
        assert agent.q.min() >= lo - 1e-12
        assert agent.q.max() <= hi + 1e-12


class TestMemoryUpdates:
    def test_discount_free_reduction(self):
        flat = make_agent(3, temperature=0.1)
        rows = make_agent(3, temperature=0.1, n_states=2)
        update_stateless(flat, 1, 0.4)
        update_with_memory(rows, 0, 1, 0.4, 1)
        assert rows.q[0, 1] == flat.q[0, 1]
        assert rows.q[1].sum() == 0.0

    def test_single_state_matches_stateless(self, rng):
        a1 = make_agent(4, temperature=0.2, gamma=0.7)
        a2 = make_agent(4, temperature=0.2, gamma=0.7, n_states=1)
        for _ in range(500):
            act = int(rng.integers(0, 4))
            r = float(rng.normal())
            update_stateless(a1, act, r)
            update_with_memory(a2, 0, act, r, 0)
        np.testing.assert_array_equal(a1.q, a2.q)

    def test_value_iteration_oracle(self):
        # deterministic cycle MDP: state = previous action, known rewards
        n = 3
        rewards = np.array([[0.1, 0.5, 0.2], [0.3, 0.0, 0.4], [0.2, 0.6, 0.1]])
        gamma = 0.9
        q_star = np.zeros((n, n))
        for _ in range(2_000):
            q_star = rewards + gamma * q_star.max(axis=1)[None, :]
        agent = make_agent(n, temperature=5.0, gamma=gamma, n_states=n,
                           schedule=LearningRateSchedule("harmonic", 1e3))
        rng = np.random.default_rng(11)
        state = 0
        for _ in range(1_500_000):
            action = select_action(agent, state, rng)
            update_with_memory(agent, state, action, rewards[state, action], action)
            state = action
        np.testing.assert_allclose(agent.q, q_star, atol=1e-6)


class TestGreedyPolicy:
    def test_tie_takes_lowest_index(self):
        agent = make_agent(2, temperature=0.1, q0=(0.3, 0.3))
        assert greedy_policy(agent)[0] == 0

    def test_reference_values_peak_at_third_spread(self):
        agent = make_agent(10, temperature=0.1, q0=tuple(TABLE4_Q))
        assert greedy_policy(agent)[0] == 2

    def test_increasing_values_pick_last(self):
        agent = make_agent(5, temperature=0.1, q0=(0.1, 0.2, 0.3, 0.4, 0.5))
        assert greedy_policy(agent)[0] == 4


class TestStateEncoding:
    def test_round_trip(self, rng):
        for _ in range(100):
            n_actions = int(rng.integers(2, 17))
            n_agents = int(rng.integers(1, 4))
            acts = tuple(int(a) for a in rng.integers(0, n_actions, size=n_agents))
            s = encode_joint_state(acts, n_actions)
            assert decode_joint_state(s, n_actions, n_agents) == acts
            assert 0 <= s < n_actions**n_agents

    def test_validation(self):
        with pytest.raises(ValueError):
            encode_joint_state([4], 4)
        with pytest.raises(ValueError):
            decode_joint_state(16, 4, 1)
