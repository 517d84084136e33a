"""Atom-contribution table for crippen.logp.

Generated by tools/fit_crippen.py: least-squares fit of the native
atom typing against reference CrippenClogP totals over 574 molecules
(fit r = 0.9909, MAE = 0.151). Regenerate rather than edit.
"""

CONTRIBUTIONS: dict[str, float] = {
    'B': -1.257264,
    'Br': 0.855667,
    'C_sp': 0.033921,
    'C_sp2': 0.219591,
    'C_sp2_het': 0.129262,
    'C_sp3_12': 0.162733,
    'C_sp3_34': 0.018551,
    'C_sp3_het_12': -0.208268,
    'C_sp3_het_34': -0.209604,
    'Cl': 0.716502,
    'F': 0.437186,
    'H_C': 0.102228,
    'H_N': -0.216119,
    'H_O': -0.131061,
    'H_other': -0.268618,
    'I': 0.826849,
    'N_1': -0.154949,
    'N_2': -0.196796,
    'N_3': -0.208941,
    'N_amide': -0.037634,
    'N_anilinic': 0.127164,
    'N_pos': -0.059649,
    'N_sp': -0.013278,
    'N_sp2': -0.032440,
    'O_OH': -0.131061,
    'O_carbonyl': -0.331975,
    'O_ester': -0.062710,
    'O_ether': -0.013029,
    'O_ether_ar': 0.046068,
    'O_neg': 0.280658,
    'P': 1.100679,
    'S': 0.681633,
    'S_ox': -0.043361,
    'c_C': 0.088493,
    'c_H': 0.190125,
    'c_fused': 0.275678,
    'c_het': 0.192813,
    'c_link': 0.235515,
    'n_ar': -0.308590,
    'n_ar_pos': -0.896576,
    'o_ar': 0.135034,
    's_ar': 0.589019,
}

ELEMENT_DEFAULTS: dict[str, float] = {
    'B': -1.257264,
    'Br': 0.855667,
    'C': 0.094067,
    'Cl': 0.716502,
    'F': 0.437186,
    'H': -0.128392,
    'I': 0.826849,
    'N': -0.178169,
    'O': -0.011002,
    'P': 1.100679,
    'S': 0.409097,
}
