use ballmodal::algebra::{down_interp, up_interp, z_of, Element8, LatticeId, Ultrafilter};

fn atoms(x: Element8) -> Vec<Element8> {
    [Element8::E1, Element8::E2, Element8::E3]
        .into_iter()
        .filter(|&a| a.leq(x))
        .collect()
}

#[test]
fn down_interp_is_monotone_and_idempotent() {
    for l in LatticeId::ALL {
        for x in Element8::ALL {
            let d = down_interp(x, l);
            assert!(l.contains(d) && d.leq(x));
            assert_eq!(down_interp(d, l), d);
            for y in Element8::ALL {
                if x.leq(y) {
                    assert!(down_interp(x, l).leq(down_interp(y, l)));
                }
            }
        }
    }
}

#[test]
fn up_interp_is_dual() {
    for l in LatticeId::ALL {
        for x in Element8::ALL {
            let u = up_interp(x, l);
            assert!(l.contains(u) && x.leq(u));
            assert_eq!(u, down_interp(x.complement(), l).complement());
        }
    }
}

#[test]
fn exactly_one_of_a_complementary_pair_reads_as_zero_elsewhere() {
    // For x in the middle of one carrier, read into another carrier.
    for l in LatticeId::ALL {
        for x in [l.atom(), l.coatom()] {
            for other in LatticeId::ALL.into_iter().filter(|&m| m != l) {
                let zeros = [x, x.complement()]
                    .into_iter()
                    .filter(|&y| down_interp(y, other) == Element8::ZERO)
                    .count();
                assert_eq!(zeros, 1, "{x} into {other:?}");
            }
        }
    }
}

#[test]
fn ultrafilters_are_principal_on_atoms() {
    for u in Ultrafilter::ALL {
        let members: Vec<Element8> = u.members().collect();
        assert_eq!(members.len(), 4);
        let generator = u.generator();
        for x in Element8::ALL {
            assert_eq!(u.contains(x), atoms(x).contains(&generator));
        }
        for l in LatticeId::ALL {
            let z = z_of(l, u);
            assert!(z != Element8::ONE && u.contains(z) && l.contains(z));
        }
    }
}
