"""Named boxes reachable from the command line without writing a box file."""

from __future__ import annotations

from typing import TYPE_CHECKING, get_args

from ncycle_entropic.core.boxes import classical_box, emax_box, isotropic_box, pr_box, white_noise
from ncycle_entropic.core.gamma import GammaVector
from ncycle_entropic.core.types import PresetName

if TYPE_CHECKING:
    from ncycle_entropic.core.box import Box

PRESET_NAMES: tuple[PresetName, ...] = get_args(PresetName)


def build_preset(name: PresetName, n: int = 4, epsilon: float = 0.9, d: int = 2) -> Box:
    """pr4 and emax4 ignore `n`; every preset except white noise is dichotomic."""
    if d != 2 and name != "white":
        msg = f"Preset {name!r} is defined for d=2 only, got d={d}"
        raise ValueError(msg)
    match name:
        case "pr4":
            return pr_box(GammaVector.canonical(4))
        case "prN":
            return pr_box(GammaVector.canonical(n))
        case "classical":
            return classical_box(GammaVector.all_plus(n))
        case "white":
            return white_noise(n, d)
        case "iso":
            return isotropic_box(n, epsilon)
        case "emax4":
            return emax_box(GammaVector.canonical(4))
    msg = f"Unknown preset {name!r}; choose one of {', '.join(PRESET_NAMES)}"
    raise ValueError(msg)
