"""Published smallest eigenvalues for beta = 1/2 (three smallest, with truncation errors).

Columns: N, required bits, lambda_1, err_1, lambda_2, err_2, lambda_3, err_3.
"""

ROWS = [
    (500, 1024, 0.1204653471966412, -6.52e-16, 1.116696239796391, -2.75e-14, 33.53605844924584, -3.45e-11),
    (1000, 2048, 0.08208748342129053, -5.57e-15, 0.8694471685364237, -2.51e-13, 16.74741576006559, -1.41e-10),
    (1500, 3072, 0.06529477501882298, -1.75e-14, 0.7587290286009394, -8.72e-13, 11.56571839375061, -2.98e-10),
    (2000, 4096, 0.05543072589537470, -3.68e-14, 0.6903595403385252, -2.02e-12, 9.032809963814945, -4.95e-10),
    (2500, 4096, 0.04878757749929328, -6.39e-14, 0.6418871023190091, -3.80e-12, 7.522048961034497, -7.23e-10),
    (3000, 5120, 0.04394036934849594, -9.83e-14, 0.6047656504596126, -6.28e-12, 6.513621908349736, -9.77e-10),
    (3500, 6144, 0.04021149503682476, -1.40e-13, 0.5749057442617896, -9.52e-12, 5.789838905207254, -1.25e-09),
    (4000, 7168, 0.03723304780176154, -1.88e-13, 0.5500577166937035, -1.36e-11, 5.243332063875005, -1.55e-09),
    (4500, 7168, 0.03478615399760864, -2.43e-13, 0.5288610646385768, -1.84e-11, 4.814940754432488, -1.87e-09),
]

BY_N = {row[0]: row for row in ROWS}


def lambda1_points():
    return [(row[0], row[2]) for row in ROWS]
