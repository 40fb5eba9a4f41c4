"""Fitted growth exponents of boundary pairings for the shipped operator cases."""
from qnodal.experiments import pairing_cases
from qnodal.restriction import pairing_growth_diagnostic


def main():
    for label, modes, op, seg in pairing_cases():
        fit = pairing_growth_diagnostic(modes, op, seg)
        print(f"{label:<28} degree {op.degree}  slope {fit.slope:6.3f}  "
              f"trivial {fit.trivial_bound}  sharp {fit.sharp_exponent}  levels {len(modes)}")


if __name__ == "__main__":
    main()
