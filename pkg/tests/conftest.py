import math

import pytest

from tendonfinger.config import default_config_path, load_finger_config
from tendonfinger.model import FingerGeometry, TendonGroup, TendonSpec

STEEL_E = 2.0e11
STEEL_AREA = math.pi * 0.001 ** 2 / 4.0


def make_specs(youngs_modulus=STEEL_E, area=STEEL_AREA, actuating_rest=0.1):
    """Both tendon groups with identical elastic properties.

    Coupling-tendon rest lengths here are placeholders; the statics uses
    the geometry-derived values, the energy model recomputes them too.
    """
    specs = []
    for group in (TendonGroup.FLEXION, TendonGroup.EXTENSION):
        for index in (1, 2, 3):
            rest = actuating_rest if index == 1 else 0.02
            specs.append(TendonSpec(
                youngs_modulus=youngs_modulus, cross_section_area=area,
                rest_length=rest, group=group, index=index,
            ))
    return tuple(specs)


@pytest.fixture(scope="session")
def calibrated():
    return load_finger_config(default_config_path())


@pytest.fixture(scope="session")
def geom_cal(calibrated):
    return calibrated.geometry


@pytest.fixture
def geom_massless(geom_cal):
    return FingerGeometry(
        link_lengths=geom_cal.link_lengths,
        guide_radii=geom_cal.guide_radii,
        link_masses=(0.0, 0.0, 0.0),
        com_fractions=geom_cal.com_fractions,
        gravity_accel=geom_cal.gravity_accel,
    )
