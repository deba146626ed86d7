"""Classic-control environments: Pendulum, CartPole(-ET), Acrobot,
MountainCar and Reacher2D."""

from __future__ import annotations

import numpy as np

from ..core import EnvSpec
from . import constants as C
from .base import Environment, _uniform


def _rk4(f, y, a, dt):
    k1 = f(y, a)
    k2 = f(y + 0.5 * dt * k1, a)
    k3 = f(y + 0.5 * dt * k2, a)
    k4 = f(y + dt * k3, a)
    return y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _wrap(x):
    return (x + np.pi) % (2 * np.pi) - np.pi


class Pendulum(Environment):
    """Torque-limited pendulum; obs ``(cos th, sin th, th_dot)``.

    Angles follow the classic-control convention: th = 0 is the unstable
    upright position and th = pi hangs at rest, which is where the reward
    ``-cos th - 0.1 sin th - 0.1 th_dot^2 - 0.001 a^2`` peaks. The asymmetric
    ``sin`` term is kept as published.
    """

    name = "pendulum"
    defaults = C.PENDULUM

    def _make_spec(self):
        p = self.params
        return EnvSpec(
            name=self.name, obs_dim=3, act_dim=1, horizon=int(p["horizon"]),
            action_low=[-p["max_torque"]], action_high=[p["max_torque"]],
            init_distribution=("uniform", {
                "low": [p["init_theta_center"] - p["init_theta_halfwidth"], -p["init_speed_halfwidth"]],
                "high": [p["init_theta_center"] + p["init_theta_halfwidth"], p["init_speed_halfwidth"]],
            }),
        )

    @staticmethod
    def observe(theta, theta_dot):
        return np.stack([np.cos(theta), np.sin(theta), theta_dot], axis=-1)

    def _dynamics(self, s, a):
        p = self.params
        th = np.arctan2(s[..., 1], s[..., 0])
        thdot = s[..., 2]
        u = a[..., 0]
        # theta measured from upright: gravity pushes away from th = 0
        acc = 3 * p["g"] / (2 * p["l"]) * np.sin(th) + 3.0 / (p["m"] * p["l"] ** 2) * u
        new_thdot = np.clip(thdot + acc * p["dt"], -p["max_speed"], p["max_speed"])
        new_th = th + new_thdot * p["dt"]
        return self.observe(new_th, new_thdot)

    def _reward(self, a, s_next):
        c, s, thdot = s_next[..., 0], s_next[..., 1], s_next[..., 2]
        return -c - 0.1 * s - 0.1 * thdot**2 - 0.001 * a[..., 0] ** 2

    def _reward_grad(self, a, s_next):
        g = np.zeros_like(s_next)
        g[..., 0] = -1.0
        g[..., 1] = -0.1
        g[..., 2] = -0.2 * s_next[..., 2]
        return g, -0.002 * a

    def _sample_init(self, gen):
        d = self.spec.init_distribution[1]
        th, thdot = _uniform(gen, d["low"], d["high"])
        return self.observe(th, thdot)

    def energy(self, s):
        """Mechanical energy per unit inertia: ``0.5 th_dot^2 + (3g/2l) cos th``."""
        p = self.params
        return 0.5 * s[..., 2] ** 2 + 1.5 * p["g"] / p["l"] * s[..., 0]


class CartPole(Environment):
    """Cart-pole with obs ``(x, x_dot, theta, theta_dot)`` and reward ``cos th - 0.01 x^2``."""

    name = "cartpole"
    defaults = C.CARTPOLE

    def _make_spec(self):
        hw = self.params["init_halfwidth"]
        low = [-hw] * 4
        high = [hw] * 4
        if "init_theta_halfwidth" in self.params:
            low[2], high[2] = -self.params["init_theta_halfwidth"], self.params["init_theta_halfwidth"]
            low[3], high[3] = -self.params["init_theta_dot_halfwidth"], self.params["init_theta_dot_halfwidth"]
        return EnvSpec(
            name=self.name, obs_dim=4, act_dim=1, horizon=int(self.params["horizon"]),
            action_low=[-1.0], action_high=[1.0],
            has_termination=self.name.endswith("_et"),
            init_distribution=("uniform", {"low": low, "high": high}),
        )

    def _dynamics(self, s, a):
        p = self.params
        x, x_dot, th, th_dot = s[..., 0], s[..., 1], s[..., 2], s[..., 3]
        u = a[..., 0]
        if p["discrete_actions"]:
            u = np.where(u > 0, 1.0, -1.0)
        force = p["force_mag"] * u
        total_mass = p["masspole"] + p["masscart"]
        pml = p["masspole"] * p["length"]
        cos, sin = np.cos(th), np.sin(th)
        temp = (force + pml * th_dot**2 * sin) / total_mass
        th_acc = (p["g"] * sin - cos * temp) / (
            p["length"] * (4.0 / 3.0 - p["masspole"] * cos**2 / total_mass)
        )
        x_acc = temp - pml * th_acc * cos / total_mass
        dt = p["dt"]
        return np.stack(
            [x + dt * x_dot, x_dot + dt * x_acc, th + dt * th_dot, th_dot + dt * th_acc], axis=-1
        )

    def _reward(self, a, s_next):
        return np.cos(s_next[..., 2]) - 0.01 * s_next[..., 0] ** 2

    def _reward_grad(self, a, s_next):
        g = np.zeros_like(s_next)
        g[..., 0] = -0.02 * s_next[..., 0]
        g[..., 2] = -np.sin(s_next[..., 2])
        return g, np.zeros_like(a)

    def _sample_init(self, gen):
        d = self.spec.init_distribution[1]
        return _uniform(gen, d["low"], d["high"])


class CartPoleET(CartPole):
    """CartPole that terminates once ``|theta| > 0.4`` rad or ``|x| > 2.4`` m."""

    name = "cartpole_et"
    defaults = C.CARTPOLE_ET

    def terminal(self, s):
        s = np.asarray(s, dtype=float)
        return (np.abs(s[..., 2]) > self.params["theta_threshold"]) | (
            np.abs(s[..., 0]) > self.params["x_threshold"]
        )


class Acrobot(Environment):
    """Two-link underactuated swing-up; obs ``(c1, s1, c2, s2, w1, w2)``.

    Continuous torque in ``[-1, 1]`` on the second joint; reward is the tip
    height ``-cos th1 - cos(th1 + th2)``.
    """

    name = "acrobot"
    defaults = C.ACROBOT

    def _make_spec(self):
        p = self.params
        hw = p["init_halfwidth"]
        return EnvSpec(
            name=self.name, obs_dim=6, act_dim=1, horizon=int(p["horizon"]),
            action_low=[-p["max_torque"]], action_high=[p["max_torque"]],
            init_distribution=("uniform", {"low": [-hw] * 4, "high": [hw] * 4}),
        )

    @staticmethod
    def observe(q):
        th1, th2, w1, w2 = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
        return np.stack([np.cos(th1), np.sin(th1), np.cos(th2), np.sin(th2), w1, w2], axis=-1)

    def _dsdt(self, q, torque):
        p = self.params
        m1, m2 = p["link_mass_1"], p["link_mass_2"]
        l1 = p["link_length_1"]
        lc1, lc2 = p["link_com_1"], p["link_com_2"]
        I1 = I2 = p["link_moi"]
        g = p["g"]
        th1, th2, w1, w2 = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
        d1 = m1 * lc1**2 + m2 * (l1**2 + lc2**2 + 2 * l1 * lc2 * np.cos(th2)) + I1 + I2
        d2 = m2 * (lc2**2 + l1 * lc2 * np.cos(th2)) + I2
        phi2 = m2 * lc2 * g * np.cos(th1 + th2 - np.pi / 2.0)
        phi1 = (
            -m2 * l1 * lc2 * w2**2 * np.sin(th2)
            - 2 * m2 * l1 * lc2 * w2 * w1 * np.sin(th2)
            + (m1 * lc1 + m2 * l1) * g * np.cos(th1 - np.pi / 2)
            + phi2
        )
        ddth2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * w1**2 * np.sin(th2) - phi2) / (
            m2 * lc2**2 + I2 - d2**2 / d1
        )
        ddth1 = -(d2 * ddth2 + phi1) / d1
        return np.stack([w1, w2, ddth1, ddth2], axis=-1)

    def _dynamics(self, s, a):
        p = self.params
        q = np.stack(
            [np.arctan2(s[..., 1], s[..., 0]), np.arctan2(s[..., 3], s[..., 2]), s[..., 4], s[..., 5]],
            axis=-1,
        )
        q = _rk4(self._dsdt, q, a[..., 0], p["dt"])
        w1 = np.clip(q[..., 2], -p["max_vel_1"], p["max_vel_1"])
        w2 = np.clip(q[..., 3], -p["max_vel_2"], p["max_vel_2"])
        return self.observe(np.stack([q[..., 0], q[..., 1], w1, w2], axis=-1))

    def _reward(self, a, s_next):
        c1, s1, c2, s2 = s_next[..., 0], s_next[..., 1], s_next[..., 2], s_next[..., 3]
        # cos(th1 + th2) = c1 c2 - s1 s2
        return -c1 - (c1 * c2 - s1 * s2)

    def _reward_grad(self, a, s_next):
        c1, s1, c2, s2 = s_next[..., 0], s_next[..., 1], s_next[..., 2], s_next[..., 3]
        g = np.zeros_like(s_next)
        g[..., 0] = -1.0 - c2
        g[..., 1] = s2
        g[..., 2] = -c1
        g[..., 3] = s1
        return g, np.zeros_like(a)

    def _sample_init(self, gen):
        d = self.spec.init_distribution[1]
        return self.observe(_uniform(gen, d["low"], d["high"]))


class MountainCar(Environment):
    """Continuous mountain car; obs ``(position, velocity)``, reward = position.

    Runs the full horizon: reaching the goal does not end the episode.
    """

    name = "mountaincar"
    defaults = C.MOUNTAINCAR

    def _make_spec(self):
        p = self.params
        return EnvSpec(
            name=self.name, obs_dim=2, act_dim=1, horizon=int(p["horizon"]),
            action_low=[-1.0], action_high=[1.0],
            init_distribution=("uniform", {"low": [p["init_low"], 0.0], "high": [p["init_high"], 0.0]}),
        )

    def _dynamics(self, s, a):
        p = self.params
        pos, vel = s[..., 0], s[..., 1]
        vel = vel + a[..., 0] * p["power"] - p["gravity_coeff"] * np.cos(3 * pos)
        vel = np.clip(vel, -p["max_speed"], p["max_speed"])
        pos = np.clip(pos + vel, p["min_position"], p["max_position"])
        vel = np.where((pos <= p["min_position"]) & (vel < 0), 0.0, vel)
        return np.stack([pos, vel], axis=-1)

    def _reward(self, a, s_next):
        return s_next[..., 0].copy()

    def _reward_grad(self, a, s_next):
        g = np.zeros_like(s_next)
        g[..., 0] = 1.0
        return g, np.zeros_like(a)

    def _sample_init(self, gen):
        d = self.spec.init_distribution[1]
        return _uniform(gen, d["low"], d["high"])


class Reacher2D(Environment):
    """Planar two-link arm reaching a per-episode random target.

    Obs (11): ``cos th (2), sin th (2), target (2), th_dot (2), tip - target (3)``;
    the last coordinate of ``tip - target`` is the (always zero) out-of-plane
    offset. Reward ``-||tip - target||_2 - ||a||_2^2``.
    """

    name = "reacher2d"
    defaults = C.REACHER2D

    def _make_spec(self):
        p = self.params
        hw, vw = p["init_angle_halfwidth"], p["init_speed_halfwidth"]
        return EnvSpec(
            name=self.name, obs_dim=11, act_dim=2, horizon=int(p["horizon"]),
            action_low=[-1.0, -1.0], action_high=[1.0, 1.0],
            init_distribution=("uniform", {
                "low": [-hw, -hw, -vw, -vw], "high": [hw, hw, vw, vw],
                "target_radius": p["target_radius"],
            }),
        )

    def tip(self, th1, th2):
        l1, l2 = self.params["link_length_1"], self.params["link_length_2"]
        return np.stack(
            [l1 * np.cos(th1) + l2 * np.cos(th1 + th2), l1 * np.sin(th1) + l2 * np.sin(th1 + th2)],
            axis=-1,
        )

    def observe(self, q, target):
        th1, th2, w1, w2 = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
        diff = self.tip(th1, th2) - target
        zero = np.zeros_like(th1)
        return np.stack(
            [np.cos(th1), np.cos(th2), np.sin(th1), np.sin(th2),
             target[..., 0], target[..., 1], w1, w2, diff[..., 0], diff[..., 1], zero],
            axis=-1,
        )

    def _dsdt(self, q, tau):
        p = self.params
        m1, m2 = p["link_mass_1"], p["link_mass_2"]
        l1, l2 = p["link_length_1"], p["link_length_2"]
        lc1, lc2 = l1 / 2, l2 / 2
        I1, I2 = m1 * l1**2 / 12, m2 * l2**2 / 12
        th2, w1, w2 = q[..., 1], q[..., 2], q[..., 3]
        c2, s2 = np.cos(th2), np.sin(th2)
        m11 = I1 + I2 + m1 * lc1**2 + m2 * (l1**2 + lc2**2 + 2 * l1 * lc2 * c2)
        m12 = I2 + m2 * (lc2**2 + l1 * lc2 * c2)
        m22 = I2 + m2 * lc2**2
        h = m2 * l1 * lc2 * s2
        # Coriolis/centrifugal terms, no gravity (horizontal plane)
        b1 = tau[..., 0] - p["damping"] * w1 + h * (2 * w1 * w2 + w2**2)
        b2 = tau[..., 1] - p["damping"] * w2 - h * w1**2
        det = m11 * m22 - m12**2
        dd1 = (m22 * b1 - m12 * b2) / det
        dd2 = (m11 * b2 - m12 * b1) / det
        return np.stack([w1, w2, dd1, dd2], axis=-1)

    def _dynamics(self, s, a):
        p = self.params
        q = np.stack(
            [np.arctan2(s[..., 2], s[..., 0]), np.arctan2(s[..., 3], s[..., 1]), s[..., 6], s[..., 7]],
            axis=-1,
        )
        target = s[..., 4:6]
        q = _rk4(self._dsdt, q, p["torque_scale"] * a, p["dt"])
        return self.observe(q, target)

    def _reward(self, a, s_next):
        dist = np.sqrt(np.sum(s_next[..., 8:11] ** 2, axis=-1))
        return -dist - np.sum(a**2, axis=-1)

    def _reward_grad(self, a, s_next):
        d = s_next[..., 8:11]
        dist = np.sqrt(np.sum(d**2, axis=-1, keepdims=True))
        g = np.zeros_like(s_next)
        g[..., 8:11] = -d / np.maximum(dist, 1e-12)
        return g, -2.0 * a

    def _sample_init(self, gen):
        d = self.spec.init_distribution[1]
        q = _uniform(gen, d["low"], d["high"])
        r = d["target_radius"]
        while True:
            target = gen.uniform(-r, r, size=2)
            if np.linalg.norm(target) < r:
                break
        return self.observe(q, target)
