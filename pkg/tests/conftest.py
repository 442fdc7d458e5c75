import itertools
import json
import random

import pytest

from thinmpi.registry import load_registry

SIX_FUNC_REGISTRY_DOC = json.dumps({
    "mode": "partition",
    "case_sensitivity": "sensitive",
    "blocks": [
        {"id": "env", "label": "environment management",
         "members": ["MPI_Init", "MPI_Finalize", "MPI_Comm_size", "MPI_Comm_rank"]},
        {"id": "p2p", "label": "point-to-point",
         "members": ["MPI_Send", "MPI_Recv"]},
    ],
})

SIX_FUNC_PROGRAM = """\
#include <mpi.h>
#include <stdio.h>

int main(int argc, char **argv)
{
    int size, rank, token = 42;
    MPI_Init(&argc, &argv);
    MPI_Comm_size(MPI_COMM_WORLD, &size);
    MPI_Comm_rank(MPI_COMM_WORLD, &rank);
    if (rank == 0) {
        MPI_Send(&token, 1, MPI_INT, 1, 0, MPI_COMM_WORLD);
    } else if (rank == 1) {
        MPI_Recv(&token, 1, MPI_INT, 0, 0, MPI_COMM_WORLD, MPI_STATUS_IGNORE);
    }
    printf("rank %d of %d\\n", rank, size);
    MPI_Finalize();
    return 0;
}
"""

SIX_FUNCTIONS = frozenset({"MPI_Init", "MPI_Comm_size", "MPI_Comm_rank",
                           "MPI_Send", "MPI_Recv", "MPI_Finalize"})


@pytest.fixture
def six_func_registry():
    return load_registry(SIX_FUNC_REGISTRY_DOC)


def overlap_registry_doc(blocks):
    """Build an overlap-mode registry document from {block_id: [names]}."""
    return json.dumps({
        "mode": "overlap",
        "case_sensitivity": "sensitive",
        "blocks": [{"id": bid, "label": bid, "members": sorted(members)}
                   for bid, members in sorted(blocks.items())],
    })


def brute_force_min_cover(invoked, blocks):
    """Independent set-cover oracle: scan all 2^n block subsets.

    Returns (minimum size, list of all optimal id-sorted selections), or
    (None, []) when no cover exists.
    """
    invoked = set(invoked)
    ids = sorted(blocks)
    best_size = None
    optima = []
    for size in range(0, len(ids) + 1):
        for combo in itertools.combinations(ids, size):
            union = set()
            for bid in combo:
                union |= set(blocks[bid])
            if invoked <= union:
                if best_size is None:
                    best_size = size
                if size == best_size:
                    optima.append(list(combo))
        if best_size is not None:
            break
    return best_size, optima


def random_overlap_instance(rng: random.Random, max_blocks=12, max_functions=24):
    """Random overlap registry + invoked subset, with coverage guaranteed."""
    n_funcs = rng.randint(1, max_functions)
    funcs = [f"MPI_F{i:02d}" for i in range(n_funcs)]
    n_blocks = rng.randint(1, max_blocks)
    blocks = {}
    for b in range(n_blocks):
        size = rng.randint(1, n_funcs)
        blocks[f"b{b:02d}"] = sorted(rng.sample(funcs, size))
    covered = sorted({f for members in blocks.values() for f in members})
    k = rng.randint(0, len(covered))
    invoked = sorted(rng.sample(covered, k))
    return blocks, invoked
