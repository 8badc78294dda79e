#!/usr/bin/env python3
"""
fvk-plate System Demo
Walks through the material law, the limiting energy, the minimizer, the
residual diagnostics and the gamma study on the built-in samples
"""

import sys
import tempfile
from pathlib import Path

# Add project root to Python path
sys.path.insert(0, str(Path(__file__).parent))


def print_header():
    """Print demo header"""
    print("🚀 fvk-plate System Demo")
    print("=" * 60)


def demo_material_law():
    """Plate moduli and the reference-matrix table for mu = lambda = 1"""
    print("\n🧱 1. Material Law")
    print("-" * 40)

    from src.core.material_law import LameMaterial, material_table

    mat = LameMaterial(1.0, 1.0)
    print(f"✅ S = {mat.young_S:.6g}, nu = {mat.poisson_nu:.6g}, B = {mat.bending_B:.6g}")
    for row in material_table(mat):
        print(f"   - {row['matrix']:<14} Q2 = {row['q2_closed']!r:<20} c = ({row['c1']:.4g}, {row['c2']:.4g}, {row['c3']:.4g})")


def demo_limit_energy():
    """I_g of the pure bending sample at zero displacement (5/18)"""
    print("\n📐 2. Limiting Energy")
    print("-" * 40)

    from src.core.config_parser import parse_config
    from src.core.limit_energy import energy_Ig
    from src.core.models import Displacement
    from src.data.sample_loader import SampleLoader

    pc = parse_config(SampleLoader().get_sample('pure-bending'))
    value = energy_Ig(pc.problem, Displacement.zeros(pc.problem.grid))
    print(f"✅ I_g(0, 0) = {value:.12f} (5/18 = {5 / 18:.12f})")


def demo_solver():
    """Minimize the variable-thickness sample and report stationarity"""
    print("\n⚙️ 3. Minimization")
    print("-" * 40)

    from src.core.config_parser import parse_config
    from src.core.solver import minimize
    from src.data.sample_loader import SampleLoader

    pc = parse_config(SampleLoader().get_sample('variable-thickness'))
    report = minimize(pc.problem, pc.solver)
    print(f"✅ {report.reason} after {report.iterations} iterations: E = {report.energy:.10g}")
    print(f"   - gradient norm: {report.grad_norm:.3e}")
    if report.stationarity:
        print(f"   - weak residual max: {report.stationarity['weak_max']:.3e}")
    if report.residuals:
        print(f"   - Airy least-squares residual: {report.residuals['airy_ls_residual']:.3e}")


def demo_gamma_study():
    """Scaled 3d energies of the recovery sequence for pure bending"""
    print("\n🔬 4. Gamma Study")
    print("-" * 40)

    from src.core.config_parser import parse_config
    from src.core.gamma_bridge import gamma_study
    from src.data.sample_loader import SampleLoader

    pc = parse_config(SampleLoader().get_sample('pure-bending'))
    g = pc.gamma
    study = gamma_study(pc.problem, pc.displacement, g.h_list, g.n_inplane, g.n_thickness, g.threads)
    for row in study.to_rows():
        print(f"   - h = {row['h']:<6g} h^-4 I^h = {row['scaled_energy']:.10f}  gap {row['rel_gap_to_Ig']:.2e}")
    print(f"✅ I_g = {study.I_g:.10f}, extrapolated = {study.extrapolated:.10f}")


def demo_cli():
    """Full CLI round: solve, then residual on the written minimizer"""
    print("\n📤 5. Command Line Round Trip")
    print("-" * 40)

    from src.main import main

    with tempfile.TemporaryDirectory() as tmp:
        solve_dir = Path(tmp) / "solve"
        residual_dir = Path(tmp) / "residual"
        code = main(['solve', '--sample', 'zero', '--out', str(solve_dir), '--log-level', 'WARNING'])
        print(f"✅ solve exit code {code}: {sorted(p.name for p in solve_dir.iterdir())}")
        code = main(['residual', '--config', str(solve_dir / 'config_echo.ini'), '--out', str(residual_dir),
                     '--displacement', str(solve_dir / 'displacement.csv'), '--log-level', 'WARNING'])
        print(f"✅ residual exit code {code}: {sorted(p.name for p in residual_dir.iterdir())}")


def main():
    """Run system demo"""
    print_header()

    demos = [
        demo_material_law,
        demo_limit_energy,
        demo_solver,
        demo_gamma_study,
        demo_cli,
    ]

    failed = 0
    for demo in demos:
        try:
            demo()
        except Exception as e:
            failed += 1
            print(f"❌ Demo error: {e}")

    print("\n" + "=" * 60)
    print("🎯 All demos finished" if not failed else f"⚠️  {failed} demo(s) failed")
    return 1 if failed else 0


if __name__ == "__main__":
    sys.exit(main())
