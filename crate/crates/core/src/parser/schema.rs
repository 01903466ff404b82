//! ID schemata, LP constraints, and assembly of one local tree.

use std::fmt;

use serde::Serialize;

use crate::grammar::{PhraseConfig, Role, Sign, Slot};
use crate::lexicon::{Grammar, LexicalEntry};
use crate::tfs::{chain_of, Clash, Dag, Feature, NodeId, Sort};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Schema {
    /// Lexical head, subject and complements, saturated mother.
    I,
    /// Lexical head and complements, COMPS saturated.
    II,
    /// Filler and a finite clause that binds it.
    III,
    /// Flat clause with an R+ filler sister to the slashed complement.
    IIIb,
    #[serde(rename = "spec")]
    Spec,
    #[serde(rename = "adjunct")]
    Adjunct,
    #[serde(rename = "marker")]
    Marker,
}

impl Schema {
    pub const ALL: [Schema; 7] =
        [Schema::I, Schema::II, Schema::III, Schema::IIIb, Schema::Spec, Schema::Adjunct, Schema::Marker];

    pub fn name(self) -> &'static str {
        match self {
            Schema::I => "I",
            Schema::II => "II",
            Schema::III => "III",
            Schema::IIIb => "IIIb",
            Schema::Spec => "spec",
            Schema::Adjunct => "adjunct",
            Schema::Marker => "marker",
        }
    }

    pub fn is_flat(self) -> bool {
        matches!(self, Schema::I | Schema::II | Schema::IIIb)
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One attempted local tree. `others` is in valence order; `surface` lists
/// daughters left to right. `binding` picks the SLASH member a filler binds:
/// (daughter, member), daughter 0 being the head and i+1 being `others[i]`.
#[derive(Clone, Debug)]
pub struct Candidate<'a> {
    pub schema: Schema,
    pub head: &'a Sign,
    /// Set when the head is a word.
    pub head_entry: Option<&'a LexicalEntry>,
    pub others: Vec<(Role, &'a Sign)>,
    pub surface: Vec<Slot>,
    pub binding: Option<(usize, usize)>,
}

#[derive(Clone, Debug)]
pub struct Built {
    pub sign: Sign,
    pub config: PhraseConfig,
}

fn clash(context: &str) -> impl Fn(Clash) -> String + '_ {
    move |c| format!("{context}: {c}")
}

fn is(g: &Grammar, s: Sort, of: Sort) -> bool {
    g.sig.is_subsort(s, of)
}

/// Nonfinite verbal sign.
fn nonfinite_verbal(g: &Grammar, s: &Sign) -> bool {
    let geo = &g.geo;
    let head = s.sort_at(&geo.head_path());
    let mut vform = geo.head_path().to_vec();
    vform.push(geo.vform);
    head.is_some_and(|h| is(g, h, geo.verb)) && !s.sort_at(&vform).is_some_and(|v| is(g, v, geo.fin))
}

/// The word-order constraints. Returns the first one violated.
pub fn lp_violation(g: &Grammar, c: &Candidate) -> Option<&'static str> {
    let pos = |slot: Slot| c.surface.iter().position(|&s| s == slot).expect("slot in surface");
    let head = pos(Slot::Head);
    match c.schema {
        Schema::I | Schema::II | Schema::IIIb => {
            if head != 0 {
                return Some("the head precedes its sisters");
            }
            let last = c.surface.len() - 1;
            for (i, (role, s)) in c.others.iter().enumerate() {
                if *role == Role::Complement && nonfinite_verbal(g, s) && pos(Slot::Other(i)) != last {
                    return Some("a nonfinite verbal complement is rightmost");
                }
            }
            if c.schema == Schema::IIIb {
                let filler = c.others.iter().position(|(r, _)| *r == Role::Filler).map(|i| pos(Slot::Other(i)));
                let comps = c
                    .others
                    .iter()
                    .enumerate()
                    .filter(|(_, (r, _))| *r == Role::Complement)
                    .map(|(i, _)| pos(Slot::Other(i)));
                if let Some(f) = filler {
                    if comps.into_iter().any(|p| p < f) {
                        return Some("the R+ filler precedes the complements");
                    }
                }
            }
            None
        }
        Schema::III => (head != 1).then_some("the filler is leftmost"),
        Schema::Spec | Schema::Adjunct => (head != 1).then_some("specifier and adjective precede the noun"),
        Schema::Marker => (head != 0).then_some("te precedes its verb"),
    }
}

pub fn lp_ok(g: &Grammar, c: &Candidate) -> bool {
    lp_violation(g, c).is_none()
}

fn roles_ok(c: &Candidate) -> Result<(), String> {
    let count = |r: Role| c.others.iter().filter(|(x, _)| *x == r).count();
    let only = |allowed: &[Role]| c.others.iter().all(|(r, _)| allowed.contains(r));
    let lexical = c.head_entry.is_some();
    let marker = c.head_entry.is_some_and(|e| e.template == "marker");
    let ok = match c.schema {
        Schema::I => {
            lexical && !marker && count(Role::Subject) == 1 && only(&[Role::Subject, Role::Complement, Role::Adjunct])
        }
        Schema::II => lexical && !marker && !c.others.is_empty() && only(&[Role::Complement, Role::Adjunct]),
        Schema::IIIb => {
            lexical
                && !marker
                && count(Role::Filler) == 1
                && count(Role::Subject) <= 1
                && count(Role::Complement) >= 1
                && only(&[Role::Subject, Role::Filler, Role::Complement, Role::Adjunct])
        }
        Schema::III => c.others.len() == 1 && count(Role::Filler) == 1,
        Schema::Spec => c.others.len() == 1 && count(Role::Specifier) == 1,
        Schema::Adjunct => c.others.len() == 1 && count(Role::Adjunct) == 1,
        Schema::Marker => marker && c.others.len() == 1 && count(Role::Complement) == 1,
    };
    if !ok {
        return Err(format!("daughters do not fit schema {}", c.schema));
    }
    if c.surface.len() != c.others.len() + 1 {
        return Err("surface order does not list every daughter once".into());
    }
    Ok(())
}

/// Assembles the mother licensed by `c`, or says why not.
pub fn build_edge(g: &Grammar, c: &Candidate) -> Result<Built, String> {
    roles_ok(c)?;
    if let Some(lp) = lp_violation(g, c) {
        return Err(format!("LP {lp}"));
    }
    let (sig, geo) = (&*g.sig, &g.geo);
    let mut d = Dag::new(sig);
    let h = d.import(&c.head.fs);
    let os: Vec<NodeId> = c.others.iter().map(|(_, s)| d.import(&s.fs)).collect();
    let sort_of = |d: &Dag, n: NodeId, path: &[Feature]| d.follow(n, path).map(|x| d.sort(x));
    let head_sort = sort_of(&d, h, &geo.head_path()).ok_or("head has no HEAD")?;

    match c.schema {
        Schema::III | Schema::IIIb => {
            let mut vform = geo.head_path().to_vec();
            vform.push(geo.vform);
            let fin = sort_of(&d, h, &vform).is_some_and(|v| is(g, v, geo.fin));
            if !is(g, head_sort, geo.verb) || !fin {
                return Err("head is not a finite verb".into());
            }
        }
        Schema::Spec | Schema::Adjunct => {
            if !is(g, head_sort, geo.noun) {
                return Err("head is not nominal".into());
            }
        }
        _ => {}
    }
    if c.schema == Schema::III {
        for f in [geo.subj, geo.comps] {
            if !sort_of(&d, h, &geo.valence_path(f)).is_some_and(|s| is(g, s, geo.elist)) {
                return Err("head clause is not saturated".into());
            }
        }
    }
    for (i, (role, _)) in c.others.iter().enumerate() {
        let dh = sort_of(&d, os[i], &geo.head_path()).ok_or("daughter has no HEAD")?;
        let fits = match (c.schema, role) {
            (Schema::Spec, _) => is(g, dh, geo.det),
            (Schema::Adjunct, _) => is(g, dh, geo.adj),
            (_, Role::Adjunct) => is(g, dh, geo.adv),
            (_, Role::Subject) => is(g, dh, geo.noun),
            _ => true,
        };
        if !fits {
            return Err(format!("{role} daughter has the wrong category"));
        }
    }

    // Valence Principle: daughters consume the head's lists from the front.
    let mut residue = Vec::new();
    for (f, role) in [(geo.subj, Role::Subject), (geo.spr, Role::Specifier), (geo.comps, Role::Complement)] {
        let name = sig.feature_name(f);
        let mut list = d.follow_or_create(h, &geo.valence_path(f)).map_err(clash(name))?;
        for (i, _) in c.others.iter().enumerate().filter(|(_, (r, _))| *r == role) {
            d.constrain(list, geo.nelist)
                .map_err(|_| format!("{name}: more {role} daughters than the head selects"))?;
            let first = d.follow_or_create(list, &[geo.first]).map_err(clash(name))?;
            let rest = d.follow_or_create(list, &[geo.rest]).map_err(clash(name))?;
            let syn = d.follow_or_create(os[i], &[geo.synsem]).map_err(clash(name))?;
            d.unify(first, syn).map_err(clash(&format!("{name} {role}")))?;
            list = d.find(rest);
        }
        residue.push(list);
    }
    let saturate: &[usize] = match c.schema {
        Schema::I | Schema::IIIb => &[0, 2],
        Schema::II => &[2],
        Schema::Spec => &[1],
        _ => &[],
    };
    for &k in saturate {
        let name = sig.feature_name([geo.subj, geo.spr, geo.comps][k]);
        d.constrain(residue[k], geo.elist)
            .map_err(|_| format!("{name}: head still selects more than its daughters supply"))?;
    }

    for (i, _) in c.others.iter().enumerate().filter(|(_, (r, _))| *r == Role::Adjunct) {
        let mut path = geo.head_path().to_vec();
        path.push(geo.modified);
        let m = d.follow(os[i], &path).ok_or("adjunct has no MOD")?;
        let hs = d.follow_or_create(h, &[geo.synsem]).map_err(clash("MOD"))?;
        d.unify(m, hs).map_err(clash("MOD"))?;
    }

    // Binding: TO-BIND on the head.
    let tb = d.follow_or_create(h, &geo.to_bind_slash_path()).map_err(clash("TO-BIND"))?;
    match c.schema {
        Schema::III | Schema::IIIb => {
            let fi = c.others.iter().position(|(r, _)| *r == Role::Filler).expect("roles checked");
            let (dtr, k) = c.binding.ok_or("no SLASH member chosen for the filler")?;
            let carrier = match dtr {
                0 => h,
                j => os[j - 1],
            };
            if c.schema == Schema::III && dtr != 0 {
                return Err("III binds the head's SLASH".into());
            }
            if c.schema == Schema::IIIb && (dtr == 0 || c.others[dtr - 1].0 != Role::Complement) {
                return Err("IIIb binds a complement's SLASH".into());
            }
            let set = d.follow(carrier, &geo.inher_slash_path()).ok_or("no INHER|SLASH")?;
            let members = chain_of(&d, sig, set).0;
            let x = *members.get(k).ok_or("no such SLASH member")?;
            if c.schema == Schema::IIIb {
                let r = d.follow(os[fi], &geo.r_path()).map(|n| d.sort(n));
                if !r.is_some_and(|r| is(g, r, geo.plus)) {
                    return Err("filler is not R+".into());
                }
            }
            let floc = d.follow(os[fi], &geo.local_path()).ok_or("filler has no LOCAL")?;
            d.unify(floc, x).map_err(clash("filler LOCAL vs SLASH"))?;
            let cell = d.add_node(geo.neset);
            let end = d.add_node(geo.eset);
            d.set_arc(cell, geo.first, x);
            d.set_arc(cell, geo.rest, end);
            d.unify(tb, cell).map_err(clash("TO-BIND"))?;
        }
        _ => {
            let empty = d.add_node(geo.eset);
            d.unify(tb, empty).map_err(clash("TO-BIND"))?;
        }
    }

    // Mother: head features, content and residual valence from the head.
    let m = d.add_node(geo.sign);
    let mut links = vec![(geo.head_path().to_vec(), d.follow(h, &geo.head_path()).expect("checked"))];
    for (k, f) in [geo.subj, geo.spr, geo.comps].into_iter().enumerate() {
        links.push((geo.valence_path(f).to_vec(), residue[k]));
    }
    let content = d.follow_or_create(h, &geo.content_path()).map_err(clash("CONTENT"))?;
    links.push((geo.content_path().to_vec(), content));
    for (path, node) in links {
        let mn = d.follow_or_create(m, &path).map_err(clash("mother"))?;
        d.unify(mn, node).map_err(clash("mother"))?;
    }

    // Nonlocal Feature Principle.
    let mut union: Vec<NodeId> = Vec::new();
    for dtr in std::iter::once(h).chain(os.iter().copied()) {
        if let Some(s) = d.follow(dtr, &geo.inher_slash_path()) {
            let (members, end) = chain_of(&d, sig, s);
            if !is(g, d.sort(end), geo.eset) {
                return Err("a daughter's INHER|SLASH is open".into());
            }
            for x in members {
                if !union.contains(&x) {
                    union.push(x);
                }
            }
        }
    }
    let bound = chain_of(&d, sig, d.find(tb)).0;
    if bound.iter().any(|b| !union.contains(b)) {
        return Err("TO-BIND member with nothing to bind".into());
    }
    let mut set = d.add_node(geo.eset);
    for &x in union.iter().filter(|x| !bound.contains(x)).rev() {
        let cell = d.add_node(geo.neset);
        d.set_arc(cell, geo.first, x);
        d.set_arc(cell, geo.rest, set);
        set = cell;
    }
    let ms = d.follow_or_create(m, &geo.inher_slash_path()).map_err(clash("mother SLASH"))?;
    d.unify(ms, set).map_err(clash("mother SLASH"))?;
    d.follow_or_create(m, &geo.to_bind_slash_path()).map_err(clash("mother TO-BIND"))?;

    d.check_constraints().map_err(clash("constraint"))?;

    let phon = c
        .surface
        .iter()
        .flat_map(|slot| match slot {
            Slot::Head => c.head.phon.iter(),
            Slot::Other(i) => c.others[*i].1.phon.iter(),
        })
        .cloned()
        .collect();
    let config = PhraseConfig::from_dag(
        &d,
        m,
        h,
        c.others.iter().map(|(r, _)| *r).zip(os.iter().copied()).collect(),
        c.surface.clone(),
    );
    Ok(Built { sign: Sign::new(phon, d.extract_fs(m)), config })
}
