#!/usr/bin/env python3
# Independent Merkle root computation for the frozen acceptance values.
# Leaf i is sha256("leaf-<i>") in hex; parents hash the concatenated raw
# digests; an odd level pairs its last node with itself.
import hashlib
import sys


def leaf(i):
    return hashlib.sha256(f"leaf-{i}".encode()).digest()


def root(nodes):
    if len(nodes) == 1:
        return nodes[0]
    if len(nodes) % 2:
        nodes = nodes + [nodes[-1]]
    return root([hashlib.sha256(nodes[k] + nodes[k + 1]).digest() for k in range(0, len(nodes), 2)])


def main():
    sizes = [int(a) for a in sys.argv[1:]] or [1, 2, 3, 4, 7, 1024]
    for n in sizes:
        print(f'    {{{n}, "{root([leaf(i) for i in range(n)]).hex()}"}},')


if __name__ == "__main__":
    main()
