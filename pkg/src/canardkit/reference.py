"""Closed-form sphere fields of the two reference systems, transcribed as printed.

These are independent of the blow-up machinery and serve as oracles for it.
Angles follow the sphere convention x ~ cosθ sinφ, y ~ sinθ sinφ, eps ~ cosφ.
"""
from __future__ import annotations

import math

import numpy as np

GOLDEN = (1 + math.sqrt(5)) / 2
ARCTAN_HALF = math.atan(0.5)

TRANSCRITICAL_EQUATOR_ANGLES = (
    0.0, math.pi, math.pi / 4, -math.pi / 4, 3 * math.pi / 4, -3 * math.pi / 4,
    ARCTAN_HALF, -ARCTAN_HALF, math.pi - ARCTAN_HALF, -(math.pi - ARCTAN_HALF),
)

# interior pitchfork roots solve sinθ = cos²θ, i.e. sinθ = 1/φ
PITCHFORK_THETA_STAR = math.asin(1 / GOLDEN)
PITCHFORK_EQUATOR_ANGLES = (
    0.0, math.pi, math.pi / 2, -math.pi / 2, PITCHFORK_THETA_STAR, math.pi - PITCHFORK_THETA_STAR,
)
# the angle as labelled in print (arctan of 1/φ); it is not a root
PITCHFORK_PRINTED_LABEL = math.atan(1 / GOLDEN)


def transcritical_sphere(theta, phi):
    t, p = np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)
    st, ct, sp, cp = np.sin(t), np.cos(t), np.sin(p), np.cos(p)
    td = (st * (6 * np.cos(2 * t) - 5 * (np.cos(4 * t) + 1)) * sp**3 + 8 * (cp / sp) * (ct - 2 * st)) / 16
    pd = cp / (6 * np.cos(2 * p) + 10) * (
        ct * (-6 * np.cos(2 * t) + 5 * np.cos(4 * t) + 5) * sp**4 + 8 * cp * (st + 2 * ct)
    )
    return td, pd


def transcritical_equator(theta):
    t = np.asarray(theta, dtype=float)
    return -np.sin(t) * (-6 * np.cos(2 * t) + 5 * np.cos(4 * t) + 5) / 16


def pitchfork_sphere(theta, phi):
    t, p = np.asarray(theta, dtype=float), np.asarray(phi, dtype=float)
    st, ct, sp, cp = np.sin(t), np.cos(t), np.sin(p), np.cos(p)
    cot, csc = cp / sp, 1 / sp
    bracket = (
        2 * st * ct**4 * (5 * sp + np.sin(3 * p))
        - 4 * ct**2 * (st**2 * np.cos(2 * p) + cp + 4 * cp * cot**2)
        + 4 * st * (np.cos(2 * p) + 3) * cot * csc**2
        - 3 * np.sin(2 * t) ** 2
    )
    td = -bracket / (2 * (np.cos(2 * t) - 8 * csc**2 + 5))
    pd = -16 * ct * cp / (-2 * np.cos(2 * t) * sp**2 + 5 * np.cos(2 * p) + 11) * (
        ct**4 * sp**4 - st * ct**2 * sp**3 + st * sp * cp + cp
    )
    return td, pd


def pitchfork_equator(theta):
    t = np.asarray(theta, dtype=float)
    st, ct = np.sin(t), np.cos(t)
    num = -3 * np.sin(2 * t) ** 2 + 8 * st * ct**4 + 4 * st**2 * ct**2
    return -num / (2 * (np.cos(2 * t) - 3))
