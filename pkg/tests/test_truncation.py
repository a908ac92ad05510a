from igklo.images import image_quasisplit, instance
from igklo.truncation import B_kernel_check, centrality_smoke, gt_count, verify_A_identity


def test_a_identity_and_kernel_even_v():
    m = image_quasisplit(instance("A", 1, [4], [0]), N=6)
    assert verify_A_identity(m)["ok"]
    b = B_kernel_check(m)
    assert b["ok"] and b["nodes"]["1"]["status"] == "pass"
    assert b["nodes"]["1"]["top_degree"] < 2


def test_kernel_skips_odd_v():
    m = image_quasisplit(instance("A", 1, [2], [0]), N=6)
    assert B_kernel_check(m)["nodes"]["1"]["reason"] == "v_i odd"


def test_gt_count_and_centrality():
    m = image_quasisplit(instance("A", 2, [1, 1], [0, 0], tau=(2, 1)), N=4)
    assert gt_count(m.data) == 1
    c = centrality_smoke(m)
    assert c["ok"] and c["gt_generators"] == 1
