//! Wallet UI crawling: element graph construction, semantic backtracking
//! and generation of typed interaction seeds.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::chain::{Address, ChainWorld, NetworkId};

/// Labels of clickables that submit the inputs of their screen.
pub const SUBMIT_LABELS: [&str; 4] = ["Next", "Review", "Save", "Confirm"];

pub const ENTRY: &str = "entry";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum ElementKind {
    Clickable,
    Input,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UiElementSpec {
    pub id: String,
    pub label: String,
    pub kind: ElementKind,
    /// Screen a click leads to.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UiScreenSpec {
    pub id: String,
    #[serde(default)]
    pub title: String,
    pub elements: Vec<UiElementSpec>,
}

/// Declarative description of a wallet's screens (`ui/1`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UiFixture {
    pub schema: String,
    pub account: Address,
    pub home: String,
    pub screens: Vec<UiScreenSpec>,
}

impl UiFixture {
    pub fn from_json(text: &str) -> Result<UiFixture, String> {
        let f: UiFixture = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if f.schema != "ui/1" {
            return Err(format!("unsupported schema `{}`", f.schema));
        }
        if f.screen(&f.home).is_none() {
            return Err(format!("home screen `{}` missing", f.home));
        }
        let mut ids = BTreeSet::new();
        for s in &f.screens {
            for e in &s.elements {
                if !ids.insert(e.id.as_str()) {
                    return Err(format!("duplicate element id `{}`", e.id));
                }
                if let Some(t) = &e.target {
                    if f.screen(t).is_none() {
                        return Err(format!("element `{}` targets unknown screen `{t}`", e.id));
                    }
                }
            }
        }
        Ok(f)
    }

    pub fn bundled() -> UiFixture {
        UiFixture::from_json(crate::assets::UI_WALLET).expect("bundled UI fixture is valid")
    }

    pub fn screen(&self, id: &str) -> Option<&UiScreenSpec> {
        self.screens.iter().find(|s| s.id == id)
    }

    /// Screen holding the element with handle `id`.
    pub fn screen_of(&self, element: &str) -> Option<&UiScreenSpec> {
        self.screens.iter().find(|s| s.elements.iter().any(|e| e.id == element))
    }

    pub fn element(&self, id: &str) -> Option<&UiElementSpec> {
        self.screens.iter().flat_map(|s| &s.elements).find(|e| e.id == id)
    }
}

/// What a crawler sees of one element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ElementView {
    pub handle: String,
    pub label: String,
    pub kind: ElementKind,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NavError {
    #[error("no element `{0}` on the current screen")]
    NoSuchElement(String),
    #[error("cannot go back from the home screen")]
    AtHome,
}

/// Navigation surface of a wallet UI.
pub trait UiNavigator {
    fn elements(&self) -> Vec<ElementView>;
    fn click(&mut self, handle: &str) -> Result<(), NavError>;
    fn back(&mut self) -> Result<(), NavError>;
    fn home(&mut self);
}

/// Navigator over a [`UiFixture`] with a history stack.
#[derive(Debug, Clone)]
pub struct FixtureNavigator {
    pub fixture: UiFixture,
    pub stack: Vec<String>,
}

impl FixtureNavigator {
    pub fn new(fixture: UiFixture) -> Self {
        let stack = vec![fixture.home.clone()];
        FixtureNavigator { fixture, stack }
    }

    pub fn current_screen(&self) -> &UiScreenSpec {
        self.fixture.screen(self.stack.last().expect("stack never empty")).expect("validated screen")
    }
}

impl UiNavigator for FixtureNavigator {
    fn elements(&self) -> Vec<ElementView> {
        self.current_screen()
            .elements
            .iter()
            .map(|e| ElementView { handle: e.id.clone(), label: e.label.clone(), kind: e.kind })
            .collect()
    }

    fn click(&mut self, handle: &str) -> Result<(), NavError> {
        let el = self
            .current_screen()
            .elements
            .iter()
            .find(|e| e.id == handle)
            .ok_or_else(|| NavError::NoSuchElement(handle.to_string()))?;
        if let Some(t) = el.target.clone() {
            self.stack.push(t);
        }
        Ok(())
    }

    fn back(&mut self) -> Result<(), NavError> {
        if self.stack.len() < 2 {
            return Err(NavError::AtHome);
        }
        self.stack.pop();
        Ok(())
    }

    fn home(&mut self) {
        self.stack.truncate(1);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct UiNode {
    pub id: String,
    pub kind: ElementKind,
    pub label: String,
    pub screen_id: String,
}

/// Interactable elements and their forward dependencies.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UiElementGraph {
    pub nodes: Vec<UiNode>,
    pub edges: Vec<(String, String)>,
    pub entry: String,
}

impl UiElementGraph {
    pub fn node(&self, id: &str) -> Option<&UiNode> {
        self.nodes.iter().find(|n| n.id == id)
    }

    pub fn parents(&self, id: &str) -> Vec<&str> {
        self.edges.iter().filter(|(_, c)| c == id).map(|(p, _)| p.as_str()).collect()
    }

    pub fn children(&self, id: &str) -> Vec<&str> {
        self.edges.iter().filter(|(p, _)| p == id).map(|(_, c)| c.as_str()).collect()
    }

    fn add_node(&mut self, node: UiNode) {
        if self.node(&node.id).is_none() {
            self.nodes.push(node);
        }
    }

    fn add_edge(&mut self, from: &str, to: &str) {
        let e = (from.to_string(), to.to_string());
        if !self.edges.contains(&e) {
            self.edges.push(e);
        }
    }

    pub fn is_acyclic(&self) -> bool {
        // Kahn's algorithm.
        let mut indeg: BTreeMap<&str, usize> = self.nodes.iter().map(|n| (n.id.as_str(), 0)).collect();
        for (_, c) in &self.edges {
            *indeg.entry(c.as_str()).or_default() += 1;
        }
        let mut ready: Vec<&str> = indeg.iter().filter(|(_, d)| **d == 0).map(|(n, _)| *n).collect();
        let mut seen = 0;
        while let Some(n) = ready.pop() {
            seen += 1;
            for c in self.children(n) {
                let d = indeg.get_mut(c).expect("edge endpoints are nodes");
                *d -= 1;
                if *d == 0 {
                    ready.push(c);
                }
            }
        }
        seen == indeg.len()
    }

    /// Every path from the entry to `id`, each starting with the entry.
    pub fn paths_to(&self, id: &str) -> Vec<Vec<String>> {
        if id == self.entry {
            return vec![vec![self.entry.clone()]];
        }
        let mut out = Vec::new();
        for p in self.parents(id) {
            for mut path in self.paths_to(p) {
                path.push(id.to_string());
                out.push(path);
            }
        }
        out
    }

    /// The entry path used for semantics; ties go to the lexicographically
    /// first path.
    pub fn backtrack(&self, id: &str) -> Option<Vec<String>> {
        self.paths_to(id).into_iter().min()
    }

    /// Graphviz export: clickables as circles, inputs as boxes.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ui {\n");
        for n in &self.nodes {
            let shape = match n.kind {
                ElementKind::Clickable => "circle",
                ElementKind::Input => "box",
            };
            let label = if n.id == self.entry { "entry" } else { n.label.as_str() };
            let _ = writeln!(out, "  \"{}\" [shape={shape}, label=\"{}\"];", n.id, label.replace('"', "\\\""));
        }
        for (a, b) in &self.edges {
            let _ = writeln!(out, "  \"{a}\" -> \"{b}\";");
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("crawl-aborted: {reason}")]
pub struct CrawlError {
    pub reason: String,
    pub partial: UiElementGraph,
}

fn screen_signature(elements: &[ElementView]) -> String {
    let mut text = String::new();
    for e in elements {
        let _ = writeln!(text, "{:?}:{}", e.kind, e.label);
    }
    hex::encode(&crate::hash::keccak256(text.as_bytes())[..8])
}

/// Depth-first crawl from the home screen. Screens already on the current
/// path are not re-entered, so back-navigation edges are dropped; screens
/// reached again from elsewhere are linked but not re-expanded. The
/// navigator is returned to the home screen afterwards.
pub fn crawl_ui(nav: &mut dyn UiNavigator) -> Result<UiElementGraph, CrawlError> {
    nav.home();
    let home = nav.elements();
    let home_sig = screen_signature(&home);
    let mut g = UiElementGraph { entry: ENTRY.to_string(), ..Default::default() };
    g.add_node(UiNode {
        id: ENTRY.to_string(),
        kind: ElementKind::Clickable,
        label: String::new(),
        screen_id: home_sig.clone(),
    });
    let mut stack = vec![home_sig.clone()];
    let mut expanded: BTreeSet<String> = BTreeSet::from([home_sig]);
    let res = visit(nav, ENTRY, &mut g, &mut stack, &mut expanded);
    nav.home();
    match res {
        Ok(()) => Ok(g),
        Err(e) => Err(CrawlError { reason: e.to_string(), partial: g }),
    }
}

fn visit(
    nav: &mut dyn UiNavigator,
    parent: &str,
    g: &mut UiElementGraph,
    stack: &mut Vec<String>,
    expanded: &mut BTreeSet<String>,
) -> Result<(), NavError> {
    let elements = nav.elements();
    let sig = screen_signature(&elements);
    link(g, parent, &elements, &sig);
    for e in elements.iter().filter(|e| e.kind == ElementKind::Clickable) {
        nav.click(&e.handle)?;
        let child = nav.elements();
        let csig = screen_signature(&child);
        if csig == sig {
            // The click did not navigate.
            continue;
        }
        if stack.contains(&csig) {
            nav.back()?;
            continue;
        }
        if !expanded.insert(csig.clone()) {
            link(g, &e.handle, &child, &csig);
            nav.back()?;
            continue;
        }
        stack.push(csig);
        let r = visit(nav, &e.handle, g, stack, expanded);
        stack.pop();
        r?;
        nav.back()?;
    }
    Ok(())
}

fn link(g: &mut UiElementGraph, parent: &str, elements: &[ElementView], sig: &str) {
    for e in elements {
        g.add_node(UiNode { id: e.handle.clone(), kind: e.kind, label: e.label.clone(), screen_id: sig.to_string() });
        g.add_edge(parent, &e.handle);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DataType {
    IntegerAmount,
    Address,
    TokenName,
    EnsName,
    FreeText,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Semantics {
    pub tag: String,
    pub data_type: DataType,
}

fn words(label: &str) -> Vec<String> {
    label.split_whitespace().map(|w| w.to_ascii_lowercase()).collect()
}

fn data_type_for(field: &[String]) -> DataType {
    let has = |ws: &[&str]| field.iter().any(|w| ws.contains(&w.as_str()));
    if has(&["amount", "decimals", "value", "quantity"]) {
        DataType::IntegerAmount
    } else if has(&["recipient", "address", "to"]) {
        DataType::Address
    } else if has(&["search", "token", "symbol"]) {
        DataType::TokenName
    } else if has(&["ens", "name"]) {
        DataType::EnsName
    } else {
        DataType::FreeText
    }
}

/// Semantic tag of a node: the last word of its nearest labeled ancestor on
/// the backtracked path (plural `s` trimmed), then the node's own words.
pub fn infer_semantics(graph: &UiElementGraph, node: &str) -> Semantics {
    let Some(path) = graph.backtrack(node) else {
        return Semantics { tag: "free-text".into(), data_type: DataType::FreeText };
    };
    let field = graph.node(node).map(|n| words(&n.label)).unwrap_or_default();
    let context = path[..path.len() - 1]
        .iter()
        .rev()
        .filter_map(|id| graph.node(id))
        .find_map(|n| words(&n.label).pop())
        .map(|w| if w.len() > 1 { w.strip_suffix('s').map(str::to_string).unwrap_or(w) } else { w });
    let tag = match (context, field.is_empty()) {
        (_, true) => return Semantics { tag: "free-text".into(), data_type: DataType::FreeText },
        (Some(c), false) => format!("{c}-{}", field.join("-")),
        (None, false) => field.join("-"),
    };
    Semantics { tag, data_type: data_type_for(&field) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum StepAction {
    Click,
    Input,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Step {
    /// Node ids from the entry (exclusive) to the target element.
    pub path: Vec<String>,
    pub action: StepAction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub data: Option<String>,
}

impl Step {
    pub fn target(&self) -> Option<&str> {
        self.path.last().map(String::as_str)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct InteractionSeed {
    pub steps: Vec<Step>,
    pub expected_semantics: String,
    pub data_type: DataType,
}

impl InteractionSeed {
    pub fn input_step(&self) -> Option<&Step> {
        self.steps.iter().find(|s| s.action == StepAction::Input)
    }
}

/// Values tried for every node of a type before random ones.
fn dictionary(dt: DataType, world: &ChainWorld, network: NetworkId, field_is_recipient: bool) -> Vec<String> {
    let mut names: BTreeSet<String> = BTreeSet::new();
    for n in world.networks.values() {
        names.extend(n.ens.records.keys().cloned());
    }
    match dt {
        DataType::Address => {
            // Names shaped like addresses are tried as plain address input.
            let mut out: Vec<String> = names
                .iter()
                .filter_map(|n| n.strip_suffix(".eth"))
                .filter(|p| Address::parse_lenient(p).is_some())
                .map(str::to_string)
                .collect();
            if field_is_recipient {
                out.extend(
                    names.iter().filter(|n| Address::parse_lenient(n.trim_end_matches(".eth")).is_none()).cloned(),
                );
            }
            out
        }
        DataType::IntegerAmount => vec!["15".into(), "1000".into()],
        DataType::TokenName => token_symbols(world, network),
        DataType::EnsName => names.into_iter().collect(),
        DataType::FreeText => vec!["hello".into()],
    }
}

fn token_symbols(world: &ChainWorld, network: NetworkId) -> Vec<String> {
    let set: BTreeSet<String> =
        world.network(network).map(|n| n.tokens.values().map(|t| t.symbol.clone()).collect()).unwrap_or_default();
    set.into_iter().collect()
}

fn random_value(dt: DataType, world: &ChainWorld, network: NetworkId, rng: &mut impl Rng) -> String {
    match dt {
        DataType::Address => Address(rng.gen()).to_string(),
        DataType::IntegerAmount => rng.gen_range(1u32..1_000_000).to_string(),
        DataType::TokenName => token_symbols(world, network).choose(rng).cloned().unwrap_or_else(|| "TOKEN".into()),
        DataType::EnsName => {
            // Hex letters only, so generated names never spell an alert keyword.
            let s: String = (0..8).map(|_| char::from(b"abcdef0123456789"[rng.gen_range(0..16)])).collect();
            format!("{s}.eth")
        }
        DataType::FreeText => (0..10).map(|_| char::from(b"abcdef0123456789"[rng.gen_range(0..16)])).collect(),
    }
}

/// Interaction seeds for every input node: the clicks along its backtracked
/// path, the typed value, then the submit button of the input's screen when
/// there is one. `per_node` random values follow the dictionary values.
pub fn generate_interactions(
    graph: &UiElementGraph,
    world: &ChainWorld,
    network: NetworkId,
    per_node: usize,
    rng: &mut impl Rng,
) -> Vec<InteractionSeed> {
    let mut out = Vec::new();
    for node in graph.nodes.iter().filter(|n| n.kind == ElementKind::Input) {
        let Some(path) = graph.backtrack(&node.id) else { continue };
        let sem = infer_semantics(graph, &node.id);
        let route = &path[1..];
        let submit = graph.nodes.iter().find(|n| {
            n.screen_id == node.screen_id
                && n.kind == ElementKind::Clickable
                && SUBMIT_LABELS.contains(&n.label.as_str())
        });
        let recipient = words(&node.label).iter().any(|w| w == "recipient");
        let mut values = dictionary(sem.data_type, world, network, recipient);
        for _ in 0..per_node {
            values.push(random_value(sem.data_type, world, network, rng));
        }
        for v in values {
            let mut steps: Vec<Step> = (1..route.len())
                .map(|i| Step { path: route[..i].to_vec(), action: StepAction::Click, data: None })
                .collect();
            steps.push(Step { path: route.to_vec(), action: StepAction::Input, data: Some(v) });
            if let Some(s) = submit {
                let mut p = route[..route.len() - 1].to_vec();
                p.push(s.id.clone());
                steps.push(Step { path: p, action: StepAction::Click, data: None });
            }
            out.push(InteractionSeed { steps, expected_semantics: sem.tag.clone(), data_type: sem.data_type });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn single_screen() -> UiFixture {
        UiFixture::from_json(
            r#"{"schema":"ui/1","account":"0x0101010101010101010101010101010101010101","home":"home",
                "screens":[{"id":"home","elements":[
                  {"id":"send","label":"Send","kind":"clickable"},
                  {"id":"to","label":"Recipient","kind":"input"},
                  {"id":"amt","label":"Amount","kind":"input"}]}]}"#,
        )
        .unwrap()
    }

    fn looping() -> UiFixture {
        UiFixture::from_json(
            r#"{"schema":"ui/1","account":"0x0101010101010101010101010101010101010101","home":"a",
                "screens":[
                  {"id":"a","elements":[{"id":"to-b","label":"Forward","kind":"clickable","target":"b"}]},
                  {"id":"b","elements":[{"id":"to-a","label":"Back","kind":"clickable","target":"a"},
                                        {"id":"memo","label":"","kind":"input"}]}]}"#,
        )
        .unwrap()
    }

    #[test]
    fn single_screen_has_four_nodes() {
        let mut nav = FixtureNavigator::new(single_screen());
        let g = crawl_ui(&mut nav).unwrap();
        assert_eq!(g.nodes.len(), 4);
        assert!(g.is_acyclic());
    }

    #[test]
    fn looping_screens_terminate() {
        let mut nav = FixtureNavigator::new(looping());
        let g = crawl_ui(&mut nav).unwrap();
        assert!(g.is_acyclic());
        assert_eq!(g.nodes.len(), 4);
        assert_eq!(nav.stack.len(), 1);
        assert_eq!(infer_semantics(&g, "memo").data_type, DataType::FreeText);
    }

    #[test]
    fn bundled_swap_bridge_path() {
        let mut nav = FixtureNavigator::new(UiFixture::bundled());
        let g = crawl_ui(&mut nav).unwrap();
        assert!(g.is_acyclic());
        let labels: Vec<&str> =
            g.backtrack("bridge-amount").unwrap()[1..].iter().map(|id| g.node(id).unwrap().label.as_str()).collect();
        assert_eq!(labels, ["Swap", "Bridge", "Amount"]);
        assert_eq!(
            infer_semantics(&g, "bridge-amount"),
            Semantics { tag: "bridge-amount".into(), data_type: DataType::IntegerAmount }
        );
        assert_eq!(infer_semantics(&g, "send-recipient").tag, "send-recipient");
        assert_eq!(infer_semantics(&g, "send-recipient").data_type, DataType::Address);
        assert_eq!(infer_semantics(&g, "token-search").tag, "token-search");
        assert_eq!(infer_semantics(&g, "token-decimals").tag, "token-decimals");
    }

    #[test]
    fn crawl_is_repeatable() {
        let mut nav = FixtureNavigator::new(UiFixture::bundled());
        assert_eq!(crawl_ui(&mut nav).unwrap(), crawl_ui(&mut nav).unwrap());
    }

    #[test]
    fn interactions_follow_graph_paths() {
        let world = ChainWorld::from_fixture_json(crate::assets::DEFAULT_WORLD).unwrap();
        let mut nav = FixtureNavigator::new(UiFixture::bundled());
        let g = crawl_ui(&mut nav).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let seeds = generate_interactions(&g, &world, NetworkId::TESTNET, 3, &mut rng);
        let inputs = g.nodes.iter().filter(|n| n.kind == ElementKind::Input).count();
        assert!(seeds.len() >= inputs);
        for s in &seeds {
            for step in &s.steps {
                let mut full = vec![ENTRY.to_string()];
                full.extend(step.path.iter().cloned());
                assert!(g.paths_to(step.target().unwrap()).contains(&full), "{full:?}");
            }
        }
        let bridge: Vec<_> = seeds.iter().filter(|s| s.expected_semantics == "bridge-amount").collect();
        assert!(!bridge.is_empty());
        for s in bridge {
            assert_eq!(s.steps[0].path, ["swap"]);
            assert_eq!(s.steps[1].path, ["swap", "bridge"]);
            assert!(s.input_step().unwrap().data.as_ref().unwrap().parse::<u64>().is_ok());
        }
        let symbols = token_symbols(&world, NetworkId::TESTNET);
        for s in seeds.iter().filter(|s| s.expected_semantics == "token-search") {
            assert!(symbols.contains(s.input_step().unwrap().data.as_ref().unwrap()));
        }
    }

    #[test]
    fn navigation_failure_keeps_partial_graph() {
        struct Broken(FixtureNavigator);
        impl UiNavigator for Broken {
            fn elements(&self) -> Vec<ElementView> {
                self.0.elements()
            }
            fn click(&mut self, h: &str) -> Result<(), NavError> {
                if h == "bridge" {
                    return Err(NavError::NoSuchElement(h.into()));
                }
                self.0.click(h)
            }
            fn back(&mut self) -> Result<(), NavError> {
                self.0.back()
            }
            fn home(&mut self) {
                self.0.home()
            }
        }
        let err = crawl_ui(&mut Broken(FixtureNavigator::new(UiFixture::bundled()))).unwrap_err();
        assert!(err.partial.node("swap").is_some());
        assert!(err.to_string().starts_with("crawl-aborted"));
    }
}
