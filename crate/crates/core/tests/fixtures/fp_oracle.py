"""Independent fingerprint oracle.

Re-implements the documented environment-hash byte layout on top of RDKit's
molecular graph and writes the folded 2048-bit radius-2 fingerprint of every
corpus molecule as hex (most significant 64-bit word first). Hydrogen
atoms kept as graph nodes (isotopes) count as attached hydrogens.
"""
import hashlib
import sys

from rdkit import Chem

OFFSET = 0xCBF29CE484222325
PRIME = 0x100000001B3
MASK = (1 << 64) - 1


def fnv(data):
    h = OFFSET
    for b in data:
        h = ((h ^ b) * PRIME) & MASK
    return h


def code(bond):
    if bond.GetIsAromatic():
        return 4
    return {1.0: 1, 2.0: 2, 3.0: 3}[bond.GetBondTypeAsDouble()]


def heavy_degree(atom):
    return sum(1 for n in atom.GetNeighbors() if n.GetAtomicNum() != 1)


def env_ids(mol, radius):
    atoms = [a for a in mol.GetAtoms() if a.GetAtomicNum() != 1]
    prev = {}
    out = []
    for a in atoms:
        prev[a.GetIdx()] = fnv(bytes([
            0, a.GetAtomicNum(), a.GetFormalCharge() & 0xFF, heavy_degree(a),
            a.GetTotalNumHs(includeNeighbors=True), int(a.GetIsAromatic()), int(a.IsInRing()),
        ]))
    out.extend(prev[a.GetIdx()] for a in atoms)
    for r in range(1, radius + 1):
        nxt = {}
        for a in atoms:
            nb = sorted(
                (code(b), prev[b.GetOtherAtomIdx(a.GetIdx())])
                for b in a.GetBonds()
                if b.GetOtherAtom(a).GetAtomicNum() != 1
            )
            buf = bytes([r]) + prev[a.GetIdx()].to_bytes(8, "little")
            for c, i in nb:
                buf += bytes([c]) + i.to_bytes(8, "little")
            nxt[a.GetIdx()] = fnv(buf)
        prev = nxt
        out.extend(prev[a.GetIdx()] for a in atoms)
    return out


def hexfp(mol, radius=2, width=2048):
    words = [0] * (width // 64)
    for i in env_ids(mol, radius):
        b = i % width
        words[b // 64] |= 1 << (b % 64)
    return "".join(f"{w:016x}" for w in reversed(words))


def main(smi_path, out_path):
    lines = []
    for raw in open(smi_path):
        raw = raw.strip()
        if not raw or raw.startswith("#"):
            continue
        smiles, name = raw.split(None, 1)
        lines.append(f"{name}\t{hexfp(Chem.MolFromSmiles(smiles))}\n")
    text = "".join(lines)
    with open(out_path, "w") as f:
        f.write(text)
    print(hashlib.sha256(text.encode()).hexdigest())


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
