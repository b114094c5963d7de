"""Multilinear maps as numpy object arrays.

A multilinear map ``A^{x n} -> W`` is stored with one axis per argument
followed by a value axis; extra leading axes (a batch of maps) are carried
along untouched.  Linear maps are matrices with images in columns.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np


def tensordot(a: np.ndarray, b: np.ndarray, axes: tuple[Sequence[int], Sequence[int]]):
    """``np.tensordot`` that also behaves for empty contractions on object arrays."""
    a_axes = [ax % a.ndim for ax in axes[0]]
    b_axes = [ax % b.ndim for ax in axes[1]]
    if any(a.shape[ax] == 0 for ax in a_axes):
        shape = tuple(s for i, s in enumerate(a.shape) if i not in a_axes) + tuple(
            s for i, s in enumerate(b.shape) if i not in b_axes
        )
        return np.zeros(shape, dtype=object)
    return np.tensordot(a, b, axes=(a_axes, b_axes))


def substitute(tensor: np.ndarray, matrix: np.ndarray, axis: int) -> np.ndarray:
    """Precompose the argument at *axis* with a linear map."""
    moved = tensordot(tensor, matrix, axes=([axis], [0]))
    return np.moveaxis(moved, -1, axis)


def postcompose(tensor: np.ndarray, matrix: np.ndarray) -> np.ndarray:
    """Apply a linear map to the value axis."""
    return tensordot(tensor, matrix, axes=([-1], [1]))


def act_left(actions: np.ndarray, tensor: np.ndarray, axis: int) -> np.ndarray:
    """``(x, args) -> x . T(args)``, with the new argument placed at *axis*.

    ``actions[i]`` is the matrix of ``v -> e_i v``.
    """
    acted = tensordot(tensor, actions, axes=([-1], [2]))
    return np.moveaxis(acted, -2, axis)


def act_right(actions: np.ndarray, tensor: np.ndarray) -> np.ndarray:
    """``(args, x) -> T(args) . x``, the new argument placed last."""
    return tensordot(tensor, actions, axes=([-1], [2]))


def split_product(tensor: np.ndarray, mult: np.ndarray, axis: int) -> np.ndarray:
    """``(.., y, z, ..) -> T(.., yz, ..)`` for the argument at *axis*."""
    split = tensordot(tensor, mult, axes=([axis], [2]))
    return np.moveaxis(split, [-2, -1], [axis, axis + 1])


def compose_left(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """``(x, y, z) -> outer(inner(x, y), z)`` for bilinear maps."""
    return tensordot(inner, outer, axes=([2], [0]))


def compose_right(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """``(x, y, z) -> outer(x, inner(y, z))`` for bilinear maps."""
    return tensordot(outer, inner, axes=([1], [2])).transpose(0, 2, 3, 1)


def bilinear_substitute(mult: np.ndarray, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """``(x, y) -> mult(left x, right y)``."""
    return substitute(substitute(mult, left, 0), right, 1)


def evaluate(mult: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """``mult(x, y)`` for coordinate vectors."""
    return tensordot(y, tensordot(x, mult, axes=([0], [0])), axes=([0], [0]))
