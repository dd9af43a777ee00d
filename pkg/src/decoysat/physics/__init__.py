"""Physics backing for the deception satellite."""

from .orbit import (OrbitalState, PropagationError, propagate_orbit,
                    elevation_deg, slant_range_km, sun_vector_eci, is_sunlit,
                    semi_major_axis_km, R_EARTH_KM, MU_EARTH_KM3_S2)
from .attitude import AttitudeState, step_attitude, angular_momentum_inertial
from .power import PowerState, step_power
from .thermal import ThermalState, step_thermal, equilibrium_K
from .magnetic import MagneticState, sample_field
from .camera import CameraState, TileLibrary, capture_image, ImageLibraryEmpty
from .world import SatelliteState, SpacecraftSimulation
