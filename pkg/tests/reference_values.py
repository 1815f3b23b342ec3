"""Published constants used as fixed reference data by the tests."""
from fractions import Fraction as F

import numpy as np

EVEN_WEIGHTS = {
    2: {1: F(1)},
    4: {1: F(-1, 3), 2: F(4, 3)},
    6: {1: F(1, 24), 2: F(-16, 15), 3: F(81, 40)},
    8: {1: F(-1, 360), 2: F(16, 45), 3: F(-729, 280), 4: F(1024, 315)},
    10: {1: F(1, 8640), 2: F(-64, 945), 3: F(6561, 4480), 4: F(-16384, 2835), 5: F(390625, 72576)},
}

ODD_WEIGHTS = {
    3: {1: F(-1, 8), 3: F(9, 8)},
    5: {1: F(1, 192), 3: F(-81, 128), 5: F(625, 384)},
    7: {1: F(-1, 9216), 3: F(729, 5120), 5: F(-15625, 9216), 7: F(117649, 46080)},
    9: {1: F(1, 737280), 3: F(-729, 40960), 5: F(390625, 516096), 7: F(-5764801, 1474560),
        9: F(4782969, 1146880)},
}


def f_closed(order, t):
    """Upper-right entry of the single-application even-order result for the 2x2 problem."""
    e = np.exp
    if order == 2:
        inner = (e(3 * t) - 1) / 6
    elif order == 4:
        inner = (e(3 * t) - 5) / 18 + 2 * e(1.5 * t) / 9
    elif order == 6:
        inner = (11 * e(3 * t) - 109) / 360 + 9 / 40 * (e(2 * t) + e(t)) - 8 / 45 * e(1.5 * t)
    elif order == 8:
        inner = ((151 * e(3 * t) - 2369) / 7560 + 256 / 945 * (e(2.25 * t) + e(0.75 * t))
                 - 81 / 280 * (e(2 * t) + e(t)) + 104 / 315 * e(1.5 * t))
    elif order == 10:
        inner = ((15619 * e(3 * t) - 347261) / 1088640
                 + 78125 / 217728 * (e(2.4 * t) + e(1.8 * t) + e(1.2 * t) + e(0.6 * t))
                 - 4096 / 8505 * (e(2.25 * t) + e(0.75 * t)) + 729 / 4480 * (e(2 * t) + e(t))
                 - 4192 / 8505 * e(1.5 * t))
    else:
        raise ValueError(order)
    return t * e(-t) * inner


# Taylor coefficients of the 2x2 upper-right entry (t^2 .. ) at each even order
F_SERIES = {
    4: [F(1, 2), 0, F(1, 8), F(5, 192)],
    6: [F(1, 2), 0, F(1, 8), F(1, 60), F(1, 80), F(1, 384)],
    8: [F(1, 2), 0, F(1, 8), F(1, 60), F(1, 80), F(1, 420), F(31, 40320), F(1307, 8601600)],
    10: [F(1, 2), 0, F(1, 8), F(1, 60), F(1, 80), F(1, 420), F(31, 40320), F(1, 6720), F(13, 403200),
         F(13099, 232243200)],
}

# hydrogen single-application coefficients of t^3, t^4, ... (4 printed digits)
HYDROGEN_EVEN = {
    2: [0.25],
    4: [0.3889, -0.1111, 0.0104],
    6: [0.4689, -0.1378, 0.0283, -0.0043],
    8: [0.4873, -0.1542, 0.0356, -0.0062],
    10: [0.4936, -0.1603, 0.0385, -0.0073],
}
HYDROGEN_ODD = {
    3: [0.5, -0.1111],
    5: [0.5, -0.1458, 0.0333, -0.0033],
    7: [0.5, -0.1628, 0.0382, -0.0067],
    9: [0.5, -0.1655, 0.0406, -0.0078],
}

# radial oscillator: exact q = t - t^3/2 + t^5/8 - t^7/48 + t^9/384 - t^11/3840
OSCILLATOR_EXACT = {1: F(1), 3: F(-1, 2), 5: F(1, 8), 7: F(-1, 48), 9: F(1, 384), 11: F(-1, 3840)}
OSCILLATOR_FIRST_WRONG = {6: (7, F(-13, 576)), 7: (9, F(1082, 385875)), 8: (9, F(20803, 7741440)),
                          9: (11, F(-341, 1224720)), 10: (11, F(-50977, 193536000))}
