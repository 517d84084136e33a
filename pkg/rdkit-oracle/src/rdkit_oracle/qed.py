"""Quantitative estimate of drug-likeness (Bickerton et al. 2012).

QED is the weighted geometric mean of eight desirability values, each
obtained by passing a molecular property through an asymmetric double
sigmoid (ADS) fitted to the property's distribution over approved drugs.
The ADS parameters and property weights below are the published ones.

Property inputs come from the reference toolkit (see driver.mjs):
MW, ALOGP, PSA, HBD, ROTB and AROM are toolkit descriptors; HBA is the
total match count of the acceptor SMARTS in patterns.json; ALERTS is the
number of structural-alert SMARTS with at least one match. The alert list
is a curated subset of the published collection (see patterns.json), which
can only undercount alerts relative to the full set.
"""

import math
from dataclasses import dataclass

PROPERTY_NAMES = ("MW", "ALOGP", "HBA", "HBD", "PSA", "ROTB", "AROM",
                  "ALERTS")


@dataclass(frozen=True)
class ADSParams:
    a: float
    b: float
    c: float
    d: float
    e: float
    f: float
    dmax: float


ADS_PARAMS = {
    "MW": ADSParams(2.817065973, 392.5754953, 290.7489764, 2.419764353,
                    49.22325677, 65.37051707, 104.9805561),
    "ALOGP": ADSParams(3.172690585, 137.8624751, 2.534937431, 4.581497897,
                       0.822739154, 0.576295591, 131.3186604),
    "HBA": ADSParams(2.948620388, 160.4605972, 3.615294657, 4.435986202,
                     0.290141953, 1.300669958, 148.7763046),
    "HBD": ADSParams(1.618662227, 1010.051101, 0.985094388, 0.000000001,
                     0.713820843, 0.920922555, 258.1632616),
    "PSA": ADSParams(1.876861559, 125.2232657, 62.90773554, 87.83366614,
                     12.01999824, 28.51324732, 104.5686167),
    "ROTB": ADSParams(0.010000000, 272.4121427, 2.558379970, 1.565547684,
                      1.271567166, 2.758063707, 105.4420403),
    "AROM": ADSParams(3.217788970, 957.7374108, 2.274627939, 0.000000001,
                      1.317690384, 0.375760881, 312.3372610),
    "ALERTS": ADSParams(0.010000000, 1199.094025, -0.09002883, 0.000000001,
                        0.185904477, 0.875193782, 417.7253140),
}

# Mean-weighting scheme (the standard single-number QED).
WEIGHTS = {
    "MW": 0.66, "ALOGP": 0.46, "HBA": 0.05, "HBD": 0.61,
    "PSA": 0.06, "ROTB": 0.65, "AROM": 0.48, "ALERTS": 0.95,
}


def ads(x: float, p: ADSParams) -> float:
    """Asymmetric double sigmoid, normalized to its fitted maximum."""
    rise = 1.0 + math.exp(-(x - p.c + p.d / 2.0) / p.e)
    fall = 1.0 + math.exp(-(x - p.c - p.d / 2.0) / p.f)
    return (p.a + p.b / rise * (1.0 - 1.0 / fall)) / p.dmax

def qed(props: dict) -> float:
    """Weighted geometric mean of the eight desirabilities, in [0, 1].

    props maps each PROPERTY_NAMES entry to its value. Desirabilities are
    strictly positive (every ADS has a > 0), so the log is safe.
    """
    total = 0.0
    wsum = 0.0
    for name in PROPERTY_NAMES:
        w = WEIGHTS[name]
        total += w * math.log(ads(float(props[name]), ADS_PARAMS[name]))
        wsum += w
    return math.exp(total / wsum)
