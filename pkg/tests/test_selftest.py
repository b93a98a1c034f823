from toricmle import delpezzo, selftest


def test_all_checks_pass():
    outcomes = selftest.run()
    failed = [(o.name, o.message) for o in outcomes if not o.passed]
    assert not failed
    groups = {o.name.split(".")[0] for o in outcomes}
    assert groups == {"model", "ipf", "catalog", "closedform", "discriminant", "table3",
                      "tfp", "phylo", "cli", "acceptance"}


def test_names_are_unique():
    names = [c.full_name for c in selftest.REGISTRY]
    assert len(names) == len(set(names))


def test_filter_selects_group():
    outcomes = selftest.run("table3")
    assert outcomes and all(o.name.startswith("table3.") for o in outcomes)
    assert selftest.run("no-such-check") == []


def test_report_is_deterministic():
    a = [o.as_dict() for o in selftest.run("phylo")]
    b = [o.as_dict() for o in selftest.run("phylo")]
    assert a == b
    assert "seconds" not in a[0]


def test_corrupted_catalog_gives_named_failure(monkeypatch):
    real = delpezzo.ml_degree

    def wrong(label):
        return 99 if label == "9" else real(label)

    monkeypatch.setattr(delpezzo, "ml_degree", wrong)
    outcomes = {o.name: o for o in selftest.run("catalog.ml_degrees")}
    assert not outcomes["catalog.ml_degrees"].passed
    assert "99" in outcomes["catalog.ml_degrees"].message


def test_crash_is_reported_not_raised(monkeypatch):
    def crash(rng):
        raise ZeroDivisionError("boom")

    monkeypatch.setattr(selftest, "REGISTRY", [selftest.Check("x", "crash", crash)])
    (o,) = selftest.run()
    assert not o.passed and o.message.startswith("ZeroDivisionError: boom")
