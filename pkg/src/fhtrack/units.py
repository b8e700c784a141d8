"""Unit conventions and physical constants.

Everything internal runs in natural units with hbar = 1: energies in eV,
time in hbar/eV, angular frequencies in eV.  Lattice constants are carried
in Angstrom and electric fields in MV/cm at the interfaces; the only
conversions needed are the two below.
"""

# One natural time unit (hbar/eV) expressed in femtoseconds.
HBAR_EV_FS = 0.6582119569

# h * (1 THz) in eV: converts a linear frequency in THz to a photon energy.
PLANCK_EV_PER_THZ = 4.135667696e-3

# hbar * (1 THz) in eV: for frequencies quoted as angular (rad/s * 1e12).
HBAR_EV_PER_THZ = PLANCK_EV_PER_THZ / (2.0 * 3.141592653589793)


def frequency_to_ev(freq_thz: float, angular: bool = False) -> float:
    """Photon energy (= angular frequency in natural units) of a drive.

    ``angular=False`` treats ``freq_thz`` as a linear frequency (cycles/s),
    which is how pump frequencies are normally quoted.
    """
    if angular:
        return freq_thz * HBAR_EV_PER_THZ
    return freq_thz * PLANCK_EV_PER_THZ


def field_times_a_ev(e_mv_cm: float, a_angstrom: float) -> float:
    """a*E in eV for a field in MV/cm and lattice constant in Angstrom."""
    # 1 MV/cm * 1 Angstrom = 1e6 V/cm * 1e-8 cm = 1e-2 eV per electron charge
    return e_mv_cm * a_angstrom * 1e-2


def natural_time_to_fs(t: float) -> float:
    return t * HBAR_EV_FS
