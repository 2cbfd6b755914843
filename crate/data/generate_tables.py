"""Regenerates au_nk.txt and sio2_nk.txt from parametric permittivity models.

Au: Lorentz-Drude fit of Rakic, Djurisic, Elazar and Majewski,
Appl. Opt. 37, 5271 (1998).
SiO2: three-oscillator model (two IR phonon bands, one UV band) tuned to
a static permittivity near 3.8 and n = 1.46 in the visible.

Usage: python3 data/generate_tables.py  (writes next to this script)
"""

from pathlib import Path

import numpy as np

HERE = Path(__file__).resolve().parent

AU_WP = 9.03
AU_DRUDE = (0.760, 0.053)
AU_OSC = [  # (f, gamma, omega) in eV
    (0.024, 0.241, 0.415),
    (0.010, 0.345, 0.830),
    (0.071, 0.870, 2.969),
    (0.601, 2.494, 4.304),
    (4.384, 2.214, 13.32),
]

SIO2_OSC = [  # (strength, gamma, omega) in eV
    (0.95, 0.0040, 0.0565),
    (0.75, 0.0080, 0.1330),
    (1.10, 0.9000, 10.40),
]


def eps_au(w):
    f0, g0 = AU_DRUDE
    e = 1 - f0 * AU_WP**2 / (w * (w + 1j * g0))
    for f, g, wj in AU_OSC:
        e += f * AU_WP**2 / (wj**2 - w**2 - 1j * w * g)
    return e


def eps_sio2(w):
    e = 1 + 0j
    for s, g, wj in SIO2_OSC:
        e += s * wj**2 / (wj**2 - w**2 - 1j * w * g)
    return e


def write(path, header, grid, eps):
    nk = np.sqrt(eps(grid))
    with open(path, "w") as fh:
        fh.write(header)
        fh.write("# energy_eV n k\n")
        for w, z in zip(grid, nk):
            fh.write(f"{w:.6e} {z.real:.6e} {abs(z.imag):.6e}\n")


if __name__ == "__main__":
    write(
        HERE / "au_nk.txt",
        "# Gold, Lorentz-Drude model (Rakic et al. 1998), 0.1-10 eV\n"
        "# Suggested extrapolation: Drude tail wp = 7.872 eV, gamma = 0.053 eV; power-law decay 2\n",
        np.geomspace(0.1, 10.0, 400),
        eps_au,
    )
    write(
        HERE / "sio2_nk.txt",
        "# Fused silica, three-oscillator model, 0.01-30 eV\n"
        "# Suggested extrapolation: constant Im(eps) below; power-law decay 3 above\n",
        np.geomspace(0.01, 30.0, 600),
        eps_sio2,
    )
