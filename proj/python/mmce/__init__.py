# SPDX-License-Identifier: Apache-2.0
"""mmWave massive-MIMO OFDM channel simulation and estimation toolkit."""

from ._mmce import *  # noqa: F401,F403
from ._mmce import __doc__  # noqa: F401
