"""Independent reference implementations used as test oracles."""

import itertools
import math


def brute_cosine(a: str, b: str) -> float:
    """Count tokens by hand and apply dot / (|A| |B|) term by term."""
    def counts(s):
        out = {}
        for tok in s.split():
            out[tok] = out.get(tok, 0) + 1
        return out

    ca, cb = counts(a), counts(b)
    vocab = sorted(set(ca) | set(cb))
    dot = 0
    na = 0
    nb = 0
    for t in vocab:
        x, y = ca.get(t, 0), cb.get(t, 0)
        dot += x * y
        na += x * x
        nb += y * y
    return dot / math.sqrt(na * nb)


def naive_patterns(profiles: dict, min_actors: int, min_clusters: int) -> set:
    """Enumerate every actor pair, intersect, test thresholds by scanning all
    actors, then drop any set strictly contained in another kept set that has
    the same supporters."""
    kept = {}
    for a, b in itertools.combinations(sorted(profiles), 2):
        common = frozenset(profiles[a]) & frozenset(profiles[b])
        if len(common) < min_clusters:
            continue
        supporters = frozenset(ip for ip, cl in profiles.items() if common.issubset(cl))
        if len(supporters) >= min_actors:
            kept[common] = supporters
    result = set()
    for c, s in kept.items():
        dominated = False
        for c2, s2 in kept.items():
            if s2 == s and c != c2 and c.issubset(c2):
                dominated = True
        if not dominated:
            result.add((c, s))
    return result


def purity(predicted, truth) -> float:
    """Fraction of items whose cluster's majority truth label matches theirs."""
    by_cluster = {}
    for p, t in zip(predicted, truth):
        by_cluster.setdefault(p, {}).setdefault(t, 0)
        by_cluster[p][t] += 1
    return sum(max(v.values()) for v in by_cluster.values()) / len(truth)


# 20 hand-constructed pairs; the first is the worked example with a
# hand-derived value of 13 / sqrt(18 * 19).
COSINE_PAIRS = [
    ("cat /proc/cpuinfo | grep name | cut -f2 -d: | uniq -c",
     "cat /proc/cpuinfo | grep name | head -n 1 | awk {print $4,$5,$6,$7,$8,$9;}"),
    ("free -m", "free -m"),
    ("ls", "free -m"),
    ("uname -a", "uname -r"),
    ("cat /proc/cpuinfo", "cat /proc/meminfo"),
    ("a a a b", "a b b b"),
    ("wget http://x/y -O z", "curl http://x/y -o z"),
    ("echo hi; echo hi", "echo hi"),
    ("| | |", "|"),
    ("ps -x", "ps -ef | grep sshd"),
    ("x y z", "z y x"),
    ("A a", "a"),
    ("/bin/busybox ECCHI", "/bin/busybox MIORI"),
    ("cd /tmp || cd /var/run", "cd /tmp"),
    ("lspci | grep VGA", "lspci | grep -i nvidia"),
    ("iptables stop", "/etc/init.d/iptables stop"),
    ("chmod 777 a b c", "chmod 777 a"),
    ("w", "w w w w"),
    ("nproc", "nproc --all"),
    ("sh -c 'x' && sh -c 'y'", "sh -c 'x'"),
]
