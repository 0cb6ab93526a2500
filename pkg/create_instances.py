""" Generate a directory of seeded dense +-1 instances from a YAML config.

    python create_instances.py -c config.yaml

Instance k of a set uses seed derive_seed(seed, k); an index.csv lists label,
seed and, for sets small enough to enumerate, the exact ground-state energy.
"""
import argparse
import os

import pandas as pd
import yaml
from tqdm import tqdm

from lib.data.dataloader import write_instance
from lib.ising import BRUTE_FORCE_MAX_N, brute_force_ground_state, gen_random_dense
from lib.rng import derive_seed


def generate_instances(n, count, seed, out_dir, fmt="json", ground_state=False):
    """ Write `count` instances of size `n` to `out_dir` and return the index frame. """
    if count < 1:
        raise ValueError("count must be at least 1, got {}".format(count))
    if fmt != "json":
        raise ValueError("dense Ising instances are written as json, got format {!r}".format(fmt))
    if ground_state and n > BRUTE_FORCE_MAX_N:
        raise ValueError("ground states are enumerated up to n={}, got n={}".format(BRUTE_FORCE_MAX_N, n))
    if os.path.isdir(out_dir) and os.listdir(out_dir):
        raise ValueError("The directory {} already exists and is not empty. Please choose another one.".format(out_dir))
    os.makedirs(out_dir, exist_ok=True)

    rows = []
    for k in tqdm(range(count), leave=False, desc="instances"):
        inst_seed = derive_seed(seed, k)
        instance = gen_random_dense(n, inst_seed)
        path = os.path.join(out_dir, "{}.{}".format(instance.label, fmt))
        write_instance(instance, path)
        row = {"label": instance.label, "seed": inst_seed, "n": n, "path": path}
        if ground_state:
            row["ground_energy"] = brute_force_ground_state(instance)[1]
        rows.append(row)
    index = pd.DataFrame(rows)
    index.to_csv(os.path.join(out_dir, "index.csv"), index=False)
    return index


if __name__ == '__main__':

    parser = argparse.ArgumentParser()
    parser.add_argument("-c", "--config", action="store", help="path to config.yaml", default="config.yaml")
    args = parser.parse_args()

    try:
        with open(args.config, "r") as ymlfile:
            config = yaml.safe_load(ymlfile)
    except FileNotFoundError:
        raise SystemExit("No File named {} found!".format(args.config))

    for name, spec in config["instance_sets"].items():
        print("Generating {} instances of n={} into {}".format(spec["count"], spec["n"], spec["out_dir"]))
        index = generate_instances(spec["n"], spec["count"], spec.get("seed", config.get("seed", 0)),
                                   spec["out_dir"], spec.get("format", "json"), spec.get("ground_state", False))
        print("{}: wrote {} instances".format(name, len(index)))
