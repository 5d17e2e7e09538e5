//! Random well-typed rules programs, written as source text so every run
//! also exercises the parser and the checker.

use rand::seq::SliceRandom;
use rand::Rng;

use super::vocab::{MSG_TYPES, NODES, SERVICES, TOPICS};

#[derive(Debug, Clone)]
pub struct ProgramOptions {
    pub max_rules_per_section: usize,
    pub max_depth: u32,
    pub max_actions: usize,
    /// Pattern file referenced by `payload`, relative to the base dir.
    pub pattern_file: Option<String>,
    /// Executable referenced by `plugin`.
    pub plugin: Option<String>,
    /// Allow `crash` actions, guarded by rarely true conditions.
    pub allow_crash: bool,
}

impl Default for ProgramOptions {
    fn default() -> Self {
        Self {
            max_rules_per_section: 4,
            max_depth: 3,
            max_actions: 4,
            pattern_file: None,
            plugin: None,
            allow_crash: true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Float,
    Bool,
    Str,
}

impl Ty {
    const ALL: [Ty; 4] = [Ty::Int, Ty::Float, Ty::Bool, Ty::Str];

    fn keyword(self) -> &'static str {
        match self {
            Ty::Int => "int",
            Ty::Float => "float",
            Ty::Bool => "bool",
            Ty::Str => "string",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Graph,
    Msg,
    External,
}

#[derive(Debug, Clone)]
struct Decl {
    name: String,
    ty: Ty,
    /// Initialized with a level name.
    level: bool,
    init: String,
}

const LEVEL_NAMES: [&str; 6] = ["__DEFAULT__", "WATCH", "ALERT", "COMPROMISED", "LOCKDOWN", "HALT"];
const STRINGS: [&str; 10] = ["", "a", "fff", "zzz", "/pose", "camera", "rule:", "x\\ty", "q\\\"uote", "\\x41\\x42"];
const REGEXES: [&str; 5] = ["/pose.*", "/cam.*", "/c.*", ".*scan", "/(cmd_vel|commands)"];
const PROGRAMS: [&str; 3] = ["/bin/true", "/bin/false", "/usr/bin/logger"];

struct Gen<'a, R: Rng> {
    rng: &'a mut R,
    opts: &'a ProgramOptions,
    levels: Vec<(String, bool)>,
    consts: Vec<Decl>,
    vars: Vec<Decl>,
    reads: Vec<bool>,
    writes: Vec<bool>,
}

/// Generate the source of a random program that passes static analysis.
pub fn random_program<R: Rng>(rng: &mut R, opts: &ProgramOptions) -> String {
    let mut g = Gen {
        rng,
        opts,
        levels: Vec::new(),
        consts: Vec::new(),
        vars: Vec::new(),
        reads: Vec::new(),
        writes: Vec::new(),
    };
    g.program()
}

impl<R: Rng> Gen<'_, R> {
    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    fn pick<'s>(&mut self, xs: &[&'s str]) -> &'s str {
        xs.choose(self.rng).copied().expect("non-empty pool")
    }

    fn program(&mut self) -> String {
        let n_levels = self.rng.gen_range(1..=5);
        self.levels = LEVEL_NAMES[..n_levels]
            .iter()
            .map(|n| (n.to_string(), false))
            .collect();
        for l in self.levels.iter_mut().skip(1) {
            l.1 = self.rng.gen_bool(0.3);
        }
        for i in 0..self.rng.gen_range(0..=4) {
            let d = self.decl(format!("c{i}"));
            self.consts.push(d);
        }
        for i in 0..self.rng.gen_range(1..=5) {
            let d = self.decl(format!("v{i}"));
            self.vars.push(d);
        }
        self.reads = vec![false; self.vars.len()];
        self.writes = vec![false; self.vars.len()];

        let mut sections: Vec<(Section, Vec<String>)> = Vec::new();
        for s in [Section::Graph, Section::Msg, Section::External] {
            let max = if s == Section::External { 2 } else { self.opts.max_rules_per_section };
            let n = self.rng.gen_range(0..=max);
            let rules = (0..n).map(|_| self.rule(s)).collect();
            sections.push((s, rules));
        }
        if self.opts.allow_crash && self.chance(0.1) {
            // Fires only once a counter-like condition is met, so runs
            // usually get some way before stopping.
            let cond = format!("Uptime > {}", self.rng.gen_range(1..50) * 10_000_000);
            let text = self.string_expr(Section::External, 1);
            sections[2].1.push(format!("{cond} ?\n    crash({text});"));
        }
        self.fix_usage(&mut sections[0].1);

        let mut out = String::new();
        out.push_str("levels:\n");
        for (name, soft) in &self.levels {
            out.push_str(&format!("    {name}{};\n", if *soft { " soft" } else { "" }));
        }
        out.push_str("\nconsts:\n");
        for c in &self.consts {
            out.push_str(&format!("    {} {} = {};\n", c.name, c.ty.keyword(), c.init));
        }
        out.push_str("\nvars:\n");
        for v in &self.vars {
            out.push_str(&format!("    {} {} = {};\n", v.name, v.ty.keyword(), v.init));
        }
        for (s, rules) in sections {
            if rules.is_empty() {
                continue;
            }
            let name = match s {
                Section::Graph => "Graph",
                Section::Msg => "Msg",
                Section::External => "External",
            };
            out.push_str(&format!("\nrules {name}:\n"));
            for r in rules {
                out.push_str(&format!("    {r}\n"));
            }
        }
        out
    }

    fn decl(&mut self, name: String) -> Decl {
        let ty = *Ty::ALL.choose(self.rng).expect("types");
        if ty == Ty::Int && self.chance(0.3) {
            let i = self.rng.gen_range(0..self.levels.len());
            return Decl {
                name,
                ty,
                level: true,
                init: self.levels[i].0.clone(),
            };
        }
        let init = match ty {
            Ty::Int => self.rng.gen_range(-5i64..20).to_string(),
            Ty::Float => format!("{:?}", self.rng.gen_range(-8i32..16) as f64 * 0.25),
            Ty::Bool => self.rng.gen_bool(0.5).to_string(),
            Ty::Str => format!("\"{}\"", self.pick(&STRINGS)),
        };
        Decl {
            name,
            ty,
            level: false,
            init,
        }
    }

    /// Make every variable both read and written.
    fn fix_usage(&mut self, graph_rules: &mut Vec<String>) {
        for i in 0..self.vars.len() {
            let v = self.vars[i].clone();
            if !self.reads[i] {
                let cond = match v.ty {
                    Ty::Int => format!("{} > 0", v.name),
                    Ty::Float => format!("{} > 0.0", v.name),
                    Ty::Bool => v.name.clone(),
                    Ty::Str => format!("{} != \"\"", v.name),
                };
                graph_rules.push(format!("{cond} ?\n        alert(\"{} set\");", v.name));
                self.reads[i] = true;
            }
            if !self.writes[i] {
                let value = self.expr(v.ty, Section::Graph, 1);
                graph_rules.push(format!("true ?\n        set({}, {value});", v.name));
                self.writes[i] = true;
            }
        }
    }

    fn rule(&mut self, s: Section) -> String {
        let trigger = self.expr(Ty::Bool, s, self.opts.max_depth);
        let n = self.rng.gen_range(1..=self.opts.max_actions);
        let mut chain = String::new();
        for k in 0..n {
            if k > 0 {
                chain.push_str(self.pick(&[", ", " => ", " !> "]));
            }
            let a = self.action(s);
            chain.push_str(&a);
        }
        format!("{trigger} ?\n        {chain};")
    }

    fn action(&mut self, s: Section) -> String {
        match self.rng.gen_range(0..10) {
            0..=2 => {
                let i = self.rng.gen_range(0..self.vars.len());
                self.writes[i] = true;
                let v = self.vars[i].clone();
                let value = if v.level && self.chance(0.5) {
                    self.level_expr()
                } else {
                    self.expr(v.ty, s, 2)
                };
                format!("set({}, {value})", v.name)
            }
            3 | 4 => format!("alert({})", self.string_expr(s, 2)),
            5 => {
                let prog = self.pick(&PROGRAMS);
                let mut args = vec![format!("\"{prog}\"")];
                for _ in 0..self.rng.gen_range(0..3) {
                    args.push(self.string_expr(s, 1));
                }
                format!("exec({})", args.join(", "))
            }
            6 => {
                let name = if self.chance(0.5) { "True" } else { "False" };
                let args: Vec<String> = (0..self.rng.gen_range(0..2))
                    .map(|_| {
                        let ty = *Ty::ALL.choose(self.rng).expect("types");
                        self.expr(ty, s, 1)
                    })
                    .collect();
                format!("{name}({})", args.join(", "))
            }
            _ => format!("trigger({})", self.level_expr()),
        }
    }

    /// An expression the checker accepts where a level is required.
    fn level_expr(&mut self) -> String {
        let mut options: Vec<String> = self.levels.iter().map(|l| l.0.clone()).collect();
        options.push("CurrLevel".to_string());
        options.extend(self.consts.iter().filter(|c| c.level).map(|c| c.name.clone()));
        let level_vars: Vec<usize> = (0..self.vars.len()).filter(|&i| self.vars[i].level).collect();
        for &i in &level_vars {
            options.push(self.vars[i].name.clone());
        }
        let choice = options.choose(self.rng).expect("levels").clone();
        if let Some(&i) = level_vars.iter().find(|&&i| self.vars[i].name == choice) {
            self.reads[i] = true;
        }
        choice
    }

    fn named(&mut self, ty: Ty) -> Option<String> {
        let consts: Vec<String> = self.consts.iter().filter(|c| c.ty == ty).map(|c| c.name.clone()).collect();
        let vars: Vec<usize> = (0..self.vars.len()).filter(|&i| self.vars[i].ty == ty).collect();
        let total = consts.len() + vars.len();
        if total == 0 {
            return None;
        }
        let k = self.rng.gen_range(0..total);
        if k < consts.len() {
            Some(consts[k].clone())
        } else {
            let i = vars[k - consts.len()];
            self.reads[i] = true;
            Some(self.vars[i].name.clone())
        }
    }

    fn expr(&mut self, ty: Ty, s: Section, depth: u32) -> String {
        if depth == 0 || self.chance(0.3) {
            return self.leaf(ty, s);
        }
        let d = depth - 1;
        match ty {
            Ty::Int => match self.rng.gen_range(0..6) {
                0 => format!("-{}", self.paren(Ty::Int, s, d)),
                1 => format!("~{}", self.paren(Ty::Int, s, d)),
                2 => {
                    // Constant zero divisors are static errors, so divide by
                    // a nonzero literal or a variable that may be zero.
                    let op = self.pick(&["/", "%"]);
                    let divisor = self.divisor();
                    format!("({} {op} {divisor})", self.expr(Ty::Int, s, d))
                }
                _ => {
                    let op = self.pick(&["+", "-", "*", "&", "|", "^"]);
                    format!("({} {op} {})", self.expr(Ty::Int, s, d), self.expr(Ty::Int, s, d))
                }
            },
            Ty::Float => match self.rng.gen_range(0..5) {
                0 => format!("-{}", self.paren(Ty::Float, s, d)),
                _ => {
                    let op = self.pick(&["+", "-", "*", "/"]);
                    format!("({} {op} {})", self.expr(Ty::Float, s, d), self.expr(Ty::Float, s, d))
                }
            },
            Ty::Str => match self.rng.gen_range(0..5) {
                0 | 1 => format!("({} + {})", self.expr(Ty::Str, s, d), self.expr(Ty::Str, s, d)),
                2 => {
                    let t = *Ty::ALL.choose(self.rng).expect("types");
                    format!("string({})", self.expr(t, s, d))
                }
                3 => format!("levelname({})", self.level_expr()),
                _ => "CurrRule".to_string(),
            },
            Ty::Bool => match self.rng.gen_range(0..10) {
                0..=2 => self.predicate(s),
                3 | 4 => {
                    let t = *Ty::ALL.choose(self.rng).expect("types");
                    let op = if t == Ty::Bool {
                        self.pick(&["==", "!="])
                    } else {
                        self.pick(&["==", "!=", "<", "<=", ">", ">="])
                    };
                    format!("({} {op} {})", self.expr(t, s, d), self.expr(t, s, d))
                }
                5 => format!("!{}", self.paren(Ty::Bool, s, d)),
                _ => {
                    let op = self.pick(&["&&", "||", "&", "|", "^"]);
                    format!("({} {op} {})", self.expr(Ty::Bool, s, d), self.expr(Ty::Bool, s, d))
                }
            },
        }
    }

    fn divisor(&mut self) -> String {
        let vars: Vec<usize> = (0..self.vars.len()).filter(|&i| self.vars[i].ty == Ty::Int).collect();
        match vars.choose(self.rng) {
            Some(&i) if self.chance(0.5) => {
                self.reads[i] = true;
                self.vars[i].name.clone()
            }
            _ => self.rng.gen_range(1..10).to_string(),
        }
    }

    fn paren(&mut self, ty: Ty, s: Section, depth: u32) -> String {
        format!("({})", self.expr(ty, s, depth))
    }

    fn leaf(&mut self, ty: Ty, s: Section) -> String {
        if self.chance(0.4) {
            if let Some(n) = self.named(ty) {
                return n;
            }
        }
        match ty {
            Ty::Int => match self.rng.gen_range(0..10) {
                0 => "CurrLevel".to_string(),
                1 => self.level_expr(),
                2 => "(Uptime / 1000000)".to_string(),
                3 => "(Time % 1000)".to_string(),
                4 => format!("0b{:b}", self.rng.gen_range(0..16)),
                5 => i64::MAX.to_string(),
                _ => self.rng.gen_range(0i64..12).to_string(),
            },
            Ty::Float => format!("{:?}", self.rng.gen_range(0i32..24) as f64 * 0.5),
            Ty::Bool => {
                if self.chance(0.5) {
                    self.predicate(s)
                } else {
                    self.rng.gen_bool(0.5).to_string()
                }
            }
            Ty::Str => format!("\"{}\"", self.pick(&STRINGS)),
        }
    }

    /// A string argument of a predicate: usually a name from the event
    /// vocabulary so predicates are sometimes true.
    fn name_arg(&mut self, pool: &[&str], s: Section) -> String {
        if self.chance(0.15) {
            self.string_expr(s, 1)
        } else {
            format!("\"{}\"", self.pick(pool))
        }
    }

    fn names(&mut self, pool: &[&str], s: Section) -> Vec<String> {
        (0..self.rng.gen_range(1..=3)).map(|_| self.name_arg(pool, s)).collect()
    }

    fn count_args(&mut self) -> (i64, i64) {
        let lo = self.rng.gen_range(0..4);
        (lo, lo + self.rng.gen_range(0..4))
    }

    fn string_expr(&mut self, s: Section, depth: u32) -> String {
        self.expr(Ty::Str, s, depth)
    }

    fn predicate(&mut self, s: Section) -> String {
        match s {
            Section::Graph => self.graph_predicate(),
            Section::Msg => self.msg_predicate(),
            Section::External => {
                if self.chance(0.7) {
                    format!("signal(\"{}\")", self.pick(&["SIGUSR1", "SIGUSR2"]))
                } else {
                    format!("idsalert({})", self.name_arg(&["ssh", "scan", "camera"], s))
                }
            }
        }
    }

    fn graph_predicate(&mut self) -> String {
        let s = Section::Graph;
        let (lo, hi) = self.count_args();
        match self.rng.gen_range(0..16) {
            0 => format!("nodes({})", self.names(&NODES, s).join(", ")),
            1 => format!("nodesinclude({})", self.names(&NODES, s).join(", ")),
            2 => format!("nodecount({lo}, {hi})"),
            3 => format!("service({}, {})", self.name_arg(&NODES, s), self.name_arg(&SERVICES, s)),
            4 => format!("servicecount({}, {lo}, {hi})", self.name_arg(&NODES, s)),
            5 => format!("services({}, {})", self.name_arg(&NODES, s), self.names(&SERVICES, s).join(", ")),
            6 => format!("servicesinclude({}, {})", self.name_arg(&NODES, s), self.names(&SERVICES, s).join(", ")),
            7 => format!("topiccount({lo}, {hi})"),
            8 => format!("topics({})", self.names(&TOPICS, s).join(", ")),
            9 => format!("topicsinclude({})", self.names(&TOPICS, s).join(", ")),
            10 => format!("topicpublishercount({}, {lo}, {hi})", self.name_arg(&TOPICS, s)),
            11 => format!("topicpublishers({}, {})", self.name_arg(&TOPICS, s), self.names(&NODES, s).join(", ")),
            12 => format!(
                "topicpublishersinclude({}, {})",
                self.name_arg(&TOPICS, s),
                self.names(&NODES, s).join(", ")
            ),
            13 => format!("topicsubscribercount({}, {lo}, {hi})", self.name_arg(&TOPICS, s)),
            14 => format!("topicsubscribers({}, {})", self.name_arg(&TOPICS, s), self.names(&NODES, s).join(", ")),
            _ => format!(
                "topicsubscribersinclude({}, {})",
                self.name_arg(&TOPICS, s),
                self.names(&NODES, s).join(", ")
            ),
        }
    }

    fn msg_predicate(&mut self) -> String {
        let s = Section::Msg;
        let (lo, hi) = self.count_args();
        loop {
            return match self.rng.gen_range(0..13) {
                0 => format!("topicin({})", self.names(&TOPICS, s).join(", ")),
                1 => format!("topicmatches(\"{}\")", self.pick(&REGEXES)),
                2 => format!("msgtypein({})", self.names(&MSG_TYPES, s).join(", ")),
                3 => {
                    let t = self.pick(&MSG_TYPES);
                    let pkg = t.split('/').next().unwrap_or("");
                    let name = t.rsplit('/').next().unwrap_or("");
                    format!("msgsubtype(\"{pkg}\", \"{name}\")")
                }
                4 => format!("publishers({})", self.names(&NODES, s).join(", ")),
                5 => format!("publishersinclude({})", self.names(&NODES, s).join(", ")),
                6 => format!("publishercount({lo}, {hi})"),
                7 => format!("subscribers({})", self.names(&NODES, s).join(", ")),
                8 => format!("subscribersinclude({})", self.names(&NODES, s).join(", ")),
                9 => format!("subscribercount({lo}, {hi})"),
                10 => match &self.opts.pattern_file {
                    Some(p) => format!("payload(\"{p}\")"),
                    None => continue,
                },
                11 => match &self.opts.plugin {
                    Some(p) => format!("plugin(\"{p}\")"),
                    None => continue,
                },
                _ => format!("topicin(\"{}\")", self.pick(&TOPICS)),
            };
        }
    }
}
