"""Rigid-body attitude dynamics.

Euler's equations with a diagonal inertia tensor, quaternion kinematics,
fixed-step RK4. The quaternion maps body frame to inertial frame, scalar
first. Plain tuples instead of numpy: single steps are called at simulation
rate and the arithmetic is only a handful of multiplies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


@dataclass
class AttitudeState:
    q: tuple          # (w, x, y, z), |q| = 1
    omega_rad_s: tuple  # body rates

    def to_dict(self) -> dict:
        return {"q": list(self.q), "omega_rad_s": list(self.omega_rad_s)}


def quat_normalize(q):
    w, x, y, z = q
    n = math.sqrt(w * w + x * x + y * y + z * z)
    return (w / n, x / n, y / n, z / n)


def quat_multiply(a, b):
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return (aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw)


def quat_conjugate(q):
    w, x, y, z = q
    return (w, -x, -y, -z)


def rotate_vector(q, v):
    """Rotate body-frame vector v into the inertial frame by q."""
    vx, vy, vz = v
    qv = (0.0, vx, vy, vz)
    w, x, y, z = quat_multiply(quat_multiply(q, qv), quat_conjugate(q))
    return (x, y, z)


def rotate_vector_inverse(q, v):
    """Rotate inertial-frame vector v into the body frame."""
    return rotate_vector(quat_conjugate(q), v)


def _derivatives(q, w, torque, inertia):
    ix, iy, iz = inertia
    wx, wy, wz = w
    tx, ty, tz = torque
    # I w_dot = tau - w x (I w)
    hx, hy, hz = ix * wx, iy * wy, iz * wz
    wd = ((tx - (wy * hz - wz * hy)) / ix,
          (ty - (wz * hx - wx * hz)) / iy,
          (tz - (wx * hy - wy * hx)) / iz)
    qw, qx, qy, qz = q
    # q_dot = 0.5 * q (x) (0, w)
    qd = (0.5 * (-qx * wx - qy * wy - qz * wz),
          0.5 * (qw * wx + qy * wz - qz * wy),
          0.5 * (qw * wy - qx * wz + qz * wx),
          0.5 * (qw * wz + qx * wy - qy * wx))
    return qd, wd


def step_attitude(state: AttitudeState, torque_body_Nm, inertia_diag, dt_s: float) -> AttitudeState:
    """One RK4 step; renormalizes the quaternion afterwards."""
    if dt_s <= 0:
        raise ValueError("dt must be positive")
    q0, w0 = state.q, state.omega_rad_s

    k1q, k1w = _derivatives(q0, w0, torque_body_Nm, inertia_diag)
    q1 = tuple(q0[i] + 0.5 * dt_s * k1q[i] for i in range(4))
    w1 = tuple(w0[i] + 0.5 * dt_s * k1w[i] for i in range(3))
    k2q, k2w = _derivatives(q1, w1, torque_body_Nm, inertia_diag)
    q2 = tuple(q0[i] + 0.5 * dt_s * k2q[i] for i in range(4))
    w2 = tuple(w0[i] + 0.5 * dt_s * k2w[i] for i in range(3))
    k3q, k3w = _derivatives(q2, w2, torque_body_Nm, inertia_diag)
    q3 = tuple(q0[i] + dt_s * k3q[i] for i in range(4))
    w3 = tuple(w0[i] + dt_s * k3w[i] for i in range(3))
    k4q, k4w = _derivatives(q3, w3, torque_body_Nm, inertia_diag)

    q = tuple(q0[i] + dt_s / 6.0 * (k1q[i] + 2 * k2q[i] + 2 * k3q[i] + k4q[i])
              for i in range(4))
    w = tuple(w0[i] + dt_s / 6.0 * (k1w[i] + 2 * k2w[i] + 2 * k3w[i] + k4w[i])
              for i in range(3))
    return AttitudeState(q=quat_normalize(q), omega_rad_s=w)


def angular_momentum_inertial(state: AttitudeState, inertia_diag) -> tuple:
    """H = R(q) I w, conserved for torque-free motion."""
    ix, iy, iz = inertia_diag
    wx, wy, wz = state.omega_rad_s
    return rotate_vector(state.q, (ix * wx, iy * wy, iz * wz))


def rotational_energy_J(state: AttitudeState, inertia_diag) -> float:
    ix, iy, iz = inertia_diag
    wx, wy, wz = state.omega_rad_s
    return 0.5 * (ix * wx * wx + iy * wy * wy + iz * wz * wz)
