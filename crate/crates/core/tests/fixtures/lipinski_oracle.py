"""Rule-of-five oracle for lipinski_panel.smi.

Evaluates the four bounds with RDKit (average weights, Crippen logP,
N/O atoms bearing H, N+O count) and prints name, violations and the failed
rules. Run: python3 lipinski_oracle.py > lipinski_panel_expected.tsv
"""
import sys
from pathlib import Path

from rdkit import Chem
from rdkit.Chem import Crippen, Descriptors

here = Path(__file__).parent
print("name\tmw\tlogp\thbd\thba\tviolations\tfailed")
for line in (here / "lipinski_panel.smi").read_text().splitlines():
    line = line.strip()
    if not line or line.startswith("#"):
        continue
    smi, name = line.split()
    m = Chem.MolFromSmiles(smi)
    mw = Descriptors.MolWt(m)
    lp = Crippen.MolLogP(m)
    hbd = sum(1 for a in m.GetAtoms() if a.GetSymbol() in "NO" and a.GetTotalNumHs() > 0)
    hba = sum(1 for a in m.GetAtoms() if a.GetSymbol() in "NO")
    failed = [n for n, ok in (("mw", mw <= 500), ("lp", lp <= 5), ("hbd", hbd <= 5), ("hba", hba <= 10)) if not ok]
    print(f"{name}\t{mw:.3f}\t{lp:.4f}\t{hbd}\t{hba}\t{len(failed)}\t{','.join(failed) or '-'}")
