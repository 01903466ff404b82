//! Templates: each expands a record's parameters into AVM text for a sign.

use super::file::{Param, Record};

pub const TEMPLATES: &[&str] = &["np", "pron", "det", "noun", "adj", "adv", "p0", "verb", "aux", "marker"];

pub struct Expansion {
    pub avm: String,
    pub wh: bool,
}

struct Params<'r> {
    record: &'r Record,
    used: Vec<&'r str>,
}

impl<'r> Params<'r> {
    fn atom(&mut self, key: &'r str, default: Option<&'r str>) -> Result<&'r str, String> {
        self.used.push(key);
        match self.record.params.iter().find(|(k, _)| k == key) {
            Some((_, Param::Atom(a))) => Ok(a),
            Some((_, Param::List(_))) => Err(format!("`{key}` takes a single value")),
            None => default.ok_or_else(|| format!("missing parameter `{key}`")),
        }
    }

    fn list(&mut self, key: &'r str) -> Result<Vec<&'r str>, String> {
        self.used.push(key);
        match self.record.params.iter().find(|(k, _)| k == key) {
            Some((_, Param::List(xs))) => Ok(xs.iter().map(String::as_str).collect()),
            Some((_, Param::Atom(_))) => Err(format!("`{key}` takes a list")),
            None => Ok(Vec::new()),
        }
    }

    fn flag(&mut self, key: &'r str) -> Result<bool, String> {
        match self.atom(key, Some("no"))? {
            "yes" => Ok(true),
            "no" => Ok(false),
            v => Err(format!("`{key}` must be yes or no, not `{v}`")),
        }
    }

    fn finish(self) -> Result<(), String> {
        match self.record.params.iter().find(|(k, _)| !self.used.contains(&k.as_str())) {
            Some((k, _)) => Err(format!("template `{}` has no parameter `{k}`", self.record.template)),
            None => Ok(()),
        }
    }
}

struct Sign<'a> {
    head: &'a str,
    subj: &'a str,
    spr: &'a str,
    comps: &'a str,
    content: &'a str,
    local_extra: &'a str,
    to_bind: &'a str,
}

impl Sign<'_> {
    fn text(&self) -> String {
        format!(
            "[sign SYNSEM [synsem LOCAL [local CAT [category HEAD {} SUBJ {} SPR {} COMPS {}] CONTENT {}{}] \
             NONLOCAL [nonlocal INHER [inherited SLASH {{}}] TO-BIND [to-bind SLASH {}]]]]",
            self.head, self.subj, self.spr, self.comps, self.content, self.local_extra, self.to_bind
        )
    }
}

fn saturated(head: &str, content: &str) -> String {
    Sign { head, subj: "<>", spr: "<>", comps: "<>", content, local_extra: "", to_bind: "{}" }.text()
}

/// A saturated NP description. `index` is a tag number shared with a role.
pub fn np_desc(head: &str, index: Option<u32>) -> String {
    let idx = index.map(|i| format!(" INDEX [{i}] index")).unwrap_or_default();
    format!("[synsem LOCAL [local CAT [category HEAD {head} SUBJ <> SPR <> COMPS <>] CONTENT [nom-obj{idx}]]]")
}

fn pp_desc(pform: &str, index: u32) -> String {
    format!(
        "[synsem LOCAL [local CAT [category HEAD [prep PFORM {pform}] SUBJ <> SPR <> COMPS <>] \
         CONTENT [nom-obj INDEX [{index}] index]]]"
    )
}

/// The preposition template: an accusative R- NP complement whose CONTENT
/// is the preposition's own, and no neuter pronoun there.
pub fn p0(pform: &str) -> String {
    Sign {
        head: &format!("[prep PFORM {pform}]"),
        subj: "<>",
        spr: "<>",
        comps: "<[synsem LOCAL [local CAT [category HEAD [noun CASE acc R minus] SUBJ <> SPR <> COMPS <>] \
                CONTENT [1] nom-obj]]>",
        content: "[1]",
        local_extra: " !CONTENT [ppro INDEX [index GENDER neut]]",
        to_bind: "{}",
    }
    .text()
}

fn verb_selecting(vform: &str, subj: &str, comps: &str, content: &str, to_bind: &str) -> String {
    Sign {
        head: &format!("[verb VFORM {vform}]"),
        subj,
        spr: "<>",
        comps,
        content,
        local_extra: "",
        to_bind,
    }
    .text()
}

pub fn expand(record: &Record) -> Result<Expansion, String> {
    let mut p = Params { record, used: Vec::new() };
    let mut wh = false;
    let avm = match record.template.as_str() {
        "np" => {
            let case = p.atom("case", Some("nom"))?;
            let gender = p.atom("gender", None)?;
            saturated(
                &format!("[noun CASE {case} R minus PRON minus]"),
                &format!("[nom-obj INDEX [index GENDER {gender}]]"),
            )
        }
        "pron" => {
            let case = p.atom("case", None)?;
            let gender = p.atom("gender", None)?;
            let r = p.atom("r", None)?;
            wh = p.flag("wh")?;
            saturated(
                &format!("[noun CASE {case} R {r} PRON plus]"),
                &format!("[ppro INDEX [index GENDER {gender}]]"),
            )
        }
        "det" => {
            wh = p.flag("wh")?;
            saturated("det", "content")
        }
        "noun" => {
            let gender = p.atom("gender", None)?;
            Sign {
                head: "[noun R minus PRON minus]",
                subj: "<>",
                spr: "<[synsem LOCAL [local CAT [category HEAD det]]]>",
                comps: "<>",
                content: &format!("[nom-obj INDEX [index GENDER {gender}]]"),
                local_extra: "",
                to_bind: "{}",
            }
            .text()
        }
        "adj" => saturated(
            "[adj MOD [synsem LOCAL [local CAT [category HEAD noun SPR nelist]]]]",
            "content",
        ),
        "adv" => saturated("[adv MOD [synsem LOCAL [local CAT [category HEAD verb]]]]", "content"),
        "p0" => p0(p.atom("pform", None)?),
        "verb" => {
            let vform = p.atom("vform", None)?;
            let rel = p.atom("rel", None)?;
            let subj = p.atom("subj", Some("np"))?;
            let comps = p.list("comps")?;
            let mut args = Vec::new();
            let subj = match subj {
                "np" => {
                    args.push(1);
                    format!("<{}>", np_desc("[noun CASE nom]", Some(1)))
                }
                "none" => "<>".to_string(),
                s => return Err(format!("subj must be np or none, not `{s}`")),
            };
            let mut elems = Vec::new();
            for c in comps {
                let tag = args.len() as u32 + 1;
                args.push(tag);
                elems.push(match c.split_once(':') {
                    None if c == "np" => np_desc("[noun CASE acc R minus]", Some(tag)),
                    Some(("pp", pform)) => pp_desc(pform, tag),
                    _ => return Err(format!("unknown complement `{c}` (use np or pp:<pform>)")),
                });
            }
            if args.len() > 3 {
                return Err("at most three arguments".into());
            }
            let roles: String = args.iter().map(|a| format!(" ARG{a} [{a}]")).collect();
            verb_selecting(vform, &subj, &format!("<{}>", elems.join(", ")), &format!("[{rel}{roles}]"), "set")
        }
        "aux" => {
            let vform = p.atom("vform", Some("fin"))?;
            let vcomp = p.atom("vcomp", None)?;
            verb_selecting(
                vform,
                &format!("<[1] {}>", np_desc("[noun CASE nom]", None)),
                &format!(
                    "<[synsem LOCAL [local CAT [category HEAD [verb VFORM {vcomp}] SUBJ <[1]> COMPS [2] list] \
                     CONTENT [3] relation]] | [2]>"
                ),
                "[3]",
                "set",
            )
        }
        "marker" => {
            let vform = p.atom("vform", Some("te-inf"))?;
            let selects = p.atom("selects", Some("inf"))?;
            verb_selecting(
                vform,
                "<[1]>",
                &format!(
                    "<[synsem LOCAL [local CAT [category HEAD [verb VFORM {selects}] SUBJ <[1] synsem> COMPS [2] list] \
                     CONTENT [3] relation]] | [2]>"
                ),
                "[3]",
                "{}",
            )
        }
        t => return Err(format!("unknown template `{t}` (known: {})", TEMPLATES.join(", "))),
    };
    p.finish()?;
    Ok(Expansion { avm, wh })
}
