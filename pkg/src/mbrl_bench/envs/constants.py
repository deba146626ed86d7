"""Physical constants for the classic-control environments.

Values follow the standard open-source classic-control implementations
(Pendulum-v1, CartPole-v1, Acrobot-v1, MountainCarContinuous-v0). Reacher2D
is a planar two-link arm with constants chosen so that a unit torque moves
the arm an appreciable fraction of a radian within one 50-step episode.

Every entry may be overridden per environment instance (``make_env(name,
**overrides)``) or through the ``[env]`` section of an experiment config.
"""

PENDULUM = {
    "g": 10.0,  # m/s^2
    "m": 1.0,  # kg
    "l": 1.0,  # m
    "dt": 0.05,  # s, semi-implicit Euler
    "max_speed": 8.0,  # rad/s
    "max_torque": 2.0,  # N m
    "horizon": 200,
    # init: theta ~ U(-pi, pi), theta_dot ~ U(-1, 1); theta = 0 is upright
    "init_theta_halfwidth": 3.141592653589793,
    "init_theta_center": 0.0,
    "init_speed_halfwidth": 1.0,
}

CARTPOLE = {
    "g": 9.8,
    "masscart": 1.0,
    "masspole": 0.1,
    "length": 0.5,  # half pole length, m
    "force_mag": 10.0,  # N per unit action
    "dt": 0.02,  # s, explicit Euler
    "horizon": 200,
    "discrete_actions": False,  # True -> force in {-1, 1} * force_mag, threshold at 0
    "init_halfwidth": 0.05,  # every coordinate ~ U(-0.05, 0.05)
}

CARTPOLE_ET = dict(
    CARTPOLE,
    theta_threshold=0.4,  # rad
    x_threshold=2.4,  # m
    # wider start so that the termination boundary is actually reachable
    init_halfwidth=0.05,
    init_theta_halfwidth=0.3,
    init_theta_dot_halfwidth=1.5,
)

ACROBOT = {
    "g": 9.8,
    "link_length_1": 1.0,
    "link_mass_1": 1.0,
    "link_mass_2": 1.0,
    "link_com_1": 0.5,
    "link_com_2": 0.5,
    "link_moi": 1.0,
    "max_vel_1": 4 * 3.141592653589793,
    "max_vel_2": 9 * 3.141592653589793,
    "max_torque": 1.0,
    "dt": 0.2,  # s, one RK4 step
    "horizon": 200,
    "init_halfwidth": 0.1,
}

MOUNTAINCAR = {
    "min_position": -1.2,
    "max_position": 0.6,
    "max_speed": 0.07,
    "power": 0.0015,
    "gravity_coeff": 0.0025,
    "horizon": 200,
    "init_low": -0.6,
    "init_high": -0.4,
}

REACHER2D = {
    "link_length_1": 0.1,  # m
    "link_length_2": 0.11,  # m
    "link_mass_1": 1.0,  # kg, uniform rods
    "link_mass_2": 1.0,
    "damping": 0.01,  # N m s / rad, per joint
    "torque_scale": 0.1,  # N m per unit action
    "dt": 0.02,  # s, one RK4 step
    "horizon": 50,
    "target_radius": 0.2,  # target ~ uniform on the disk of this radius
    "init_angle_halfwidth": 0.1,
    "init_speed_halfwidth": 0.005,
}
