from .errors import *
from .format_power import *
from .geometry import *
from .params import *
from .channel import *
from .scenario import *
from .bounds import *
from .montecarlo import *
from .plot_generator import *
from .validation import *
from .experiments import *
