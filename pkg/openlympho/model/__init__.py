"""Layer definitions, the patch network, training, model files and gradient checking."""

from .network_defaults import *
from .network_objects import *
from .network_system import *
from .network_io import *
from .gradcheck import *
