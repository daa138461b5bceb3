"""Published cross-participant average correlations for the real dataset.

Used only by the optional reproduction tier: when actual recordings are
available, sweep results are compared against these numbers and the
deviations reported. Keys are model kind, then lag in ms; values are
(x, y, z) Pearson correlations averaged over twelve participants.
"""

REFERENCE_AVERAGE_PCC = {
    "mlr": {
        150: (0.5072, 0.5184, 0.3805),
        200: (0.4974, 0.5088, 0.3745),
        250: (0.5010, 0.5122, 0.3834),
        300: (0.5006, 0.5113, 0.3724),
        350: (0.5051, 0.5162, 0.3668),
    },
    "mlp": {
        150: (0.7336, 0.7426, 0.5778),
        200: (0.7310, 0.7409, 0.5907),
        250: (0.7534, 0.7605, 0.6056),
        300: (0.7500, 0.7614, 0.6163),
        350: (0.7610, 0.7692, 0.6206),
    },
    "cnnlstm": {
        150: (0.7644, 0.7733, 0.5575),
        200: (0.7618, 0.7724, 0.5822),
        250: (0.7908, 0.7990, 0.6005),
        300: (0.7711, 0.7762, 0.5983),
        350: (0.7706, 0.7784, 0.6193),
    },
}

# Cross-participant spread (population std) at the headline setting.
REFERENCE_STD_CNNLSTM_250 = (0.043, 0.042, 0.090)
