use wallet_fuzz::assets;
use wallet_fuzz::chain::{Address, Amount, ChainWorld, NetworkId};
use wallet_fuzz::codec::{DataFormat, FieldRole, SigningMethod};
use wallet_fuzz::harness::{
    has_alert_keyword, MockWallet, RenderedScreen, WalletAdapter, WalletProfile, WalletSession,
};
use wallet_fuzz::seeds::ui::{DataType, InteractionSeed, Step, StepAction, UiFixture};
use wallet_fuzz::seeds::{bundled_message_corpus, MessagePayload, MessageSeed, TransactionSeed};

fn world() -> ChainWorld {
    ChainWorld::from_fixture_json(assets::DEFAULT_WORLD).unwrap()
}

fn wallet(profile: &str) -> (MockWallet, WalletSession) {
    let w = world();
    let ui = UiFixture::bundled();
    let session = WalletSession::new(&w, ui.account);
    (MockWallet::new(WalletProfile::load(profile).unwrap(), w, ui), session)
}

fn addr(s: &str) -> Address {
    s.parse().unwrap()
}

fn all_text(screens: &[RenderedScreen]) -> Vec<String> {
    screens.iter().flat_map(|s| s.texts().map(str::to_string)).collect()
}

fn any_keyword(screens: &[RenderedScreen]) -> bool {
    screens.iter().flat_map(|s| s.texts()).any(has_alert_keyword)
}

fn tx(from: &str, to: &str, value: u64, input: &str) -> TransactionSeed {
    TransactionSeed {
        from: addr(from),
        to: addr(to),
        value: Amount::from_u64(value),
        inputdata: input.into(),
        gas_price: Amount::from_u64(30_000_000_000),
        chain_id: NetworkId::TESTNET,
        signing_method: SigningMethod::EthSendTransactions,
        context: Vec::new(),
    }
}

const USER: &str = "0x5a0b54d5dc17e0aadc383d2db43b0a0d3e029c4c";

#[test]
fn benign_transfer_on_hardened_confirms_quietly() {
    let (mut w, mut s) = wallet("hardened");
    let screens = w
        .submit_transaction(
            &mut s,
            &tx("0x1000000000000000000000000000000000000001", "0x1000000000000000000000000000000000000002", 1000, ""),
        )
        .unwrap();
    assert_eq!(screens.last().unwrap().screen_id, "confirm");
    assert!(!any_keyword(&screens));
}

#[test]
fn gasprice_branch_simulates_a_reward() {
    let (mut w, mut s) = wallet("inject-v2");
    let screens = w.submit_transaction(&mut s, &tx(USER, "0xf3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3", 0, "")).unwrap();
    let sim = screens.iter().find(|s| s.screen_id == "simulation").unwrap();
    assert_eq!(sim.texts().collect::<Vec<_>>(), vec!["+100 RWD"]);
}

#[test]
fn state_dependent_rule_withholds_the_simulation() {
    let (mut w, mut s) = wallet("hardened");
    let screens = w.submit_transaction(&mut s, &tx(USER, "0xf3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3", 0, "")).unwrap();
    assert!(any_keyword(&screens));
    assert!(all_text(&screens).iter().any(|l| l == "Simulation unavailable"));
}

#[test]
fn missing_prefix_switches_network_silently() {
    let (mut w, mut s) = wallet("metamask-like");
    assert_eq!(s.connected_network, NetworkId::TESTNET);
    let input = "a9059cbb00000000000000000000000010000000000000000000000000000000000000040000000000000000000000000000000000000000000000000000000000000001";
    w.submit_transaction(&mut s, &tx(USER, "0xaa00000000000000000000000000000000000001", 0, input)).unwrap();
    assert_eq!(s.connected_network, NetworkId::MAINNET);

    let (mut w, mut s) = wallet("hardened");
    w.submit_transaction(&mut s, &tx(USER, "0xaa00000000000000000000000000000000000001", 0, input)).unwrap();
    assert_eq!(s.connected_network, NetworkId::TESTNET);
}

#[test]
fn blocked_request_leaves_screen_unchanged() {
    let (mut w, mut s) = wallet("hardened");
    let mut p = w.profile.clone();
    p.alert_rules.insert("risky-address".into(), wallet_fuzz::harness::AlertLevel::Block);
    w.profile = p;
    let screens = w.submit_transaction(&mut s, &tx(USER, "0xdead000000000000000000000000000000000001", 1, "")).unwrap();
    assert_eq!(screens.len(), 1);
    assert!(!screens[0].changed_from_previous);
}

fn hash_seed() -> MessageSeed {
    MessageSeed {
        format: DataFormat::HashString,
        signing_method: SigningMethod::EthSign,
        payload: MessagePayload::Hash {
            hash: "0x1c8aff950685c2ed4bc3174f3472287b56d9517b9c948127319a09a7a36deac8".into(),
        },
        connected_network: NetworkId::TESTNET,
        connected_uri: "https://app.example.org".into(),
    }
}

#[test]
fn eth_sign_without_rule_shows_bare_hash() {
    let (mut w, mut s) = wallet("inject-v3");
    let screens = w.submit_message(&mut s, &hash_seed()).unwrap();
    let text = all_text(&screens);
    assert!(text.iter().any(|l| l == "0x1c8aff950685c2ed4bc3174f3472287b56d9517b9c948127319a09a7a36deac8"));
    assert!(!any_keyword(&screens));

    let (mut w, mut s) = wallet("hardened");
    assert!(any_keyword(&w.submit_message(&mut s, &hash_seed()).unwrap()));
}

fn mail() -> MessageSeed {
    bundled_message_corpus(NetworkId::TESTNET)
        .unwrap()
        .into_iter()
        .find(|m| matches!(&m.payload, MessagePayload::TypedData { json } if json.contains("Ether Mail")))
        .unwrap()
}

#[test]
fn chain_id_mismatch_warns() {
    let mut m = mail();
    let MessagePayload::TypedData { json } = &mut m.payload else { unreachable!() };
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v["domain"]["chainId"] = 137.into();
    *json = v.to_string();
    let (mut w, mut s) = wallet("hardened");
    let screens = w.submit_message(&mut s, &m).unwrap();
    assert!(any_keyword(&screens));
    assert!(all_text(&screens).iter().any(|l| l == "Chain ID: 137"));
}

#[test]
fn raw_json_omits_undisplayed_fields() {
    let (mut w, mut s) = wallet("hardened");
    w.profile.display_mode = wallet_fuzz::harness::DisplayMode::RawJson;
    w.profile.displayed_message_fields.retain(|r| !matches!(r, FieldRole::Sender | FieldRole::ChainId));
    let text = all_text(&w.submit_message(&mut s, &mail()).unwrap()).join("\n");
    assert!(!text.contains("chainId"));
    assert!(!text.to_lowercase().contains("0xcd2a3d9f938e13cd947ec05abc7fe734df8dd826"));
    assert!(text.contains("Hello, Bob!"));
}

#[test]
fn raw_json_with_full_field_set_is_verbatim() {
    let (mut w, mut s) = wallet("inject-v13");
    let m = mail();
    let MessagePayload::TypedData { json } = &m.payload else { unreachable!() };
    let text = all_text(&w.submit_message(&mut s, &m).unwrap());
    assert_eq!(text[1..].join("\n"), *json);
}

fn interaction(route: &[&str], input: &str, submit: Option<&str>) -> InteractionSeed {
    let mut steps: Vec<Step> = (1..route.len())
        .map(|i| Step {
            path: route[..i].iter().map(|s| s.to_string()).collect(),
            action: StepAction::Click,
            data: None,
        })
        .collect();
    steps.push(Step {
        path: route.iter().map(|s| s.to_string()).collect(),
        action: StepAction::Input,
        data: Some(input.into()),
    });
    if let Some(sub) = submit {
        let mut p: Vec<String> = route[..route.len() - 1].iter().map(|s| s.to_string()).collect();
        p.push(sub.into());
        steps.push(Step { path: p, action: StepAction::Click, data: None });
    }
    InteractionSeed { steps, expected_semantics: "test".into(), data_type: DataType::FreeText }
}

#[test]
fn name_only_search_lists_identical_lines() {
    let (mut w, mut s) = wallet("name-only-search");
    let screens = w.submit_interaction(&mut s, &interaction(&["tokens", "token-search"], "USDT", None)).unwrap();
    let hits: Vec<_> = all_text(&screens).into_iter().filter(|l| l.starts_with("Token: ")).collect();
    assert_eq!(hits, vec!["Token: USDT", "Token: USDT"]);

    let (mut w, mut s) = wallet("hardened");
    let screens = w.submit_interaction(&mut s, &interaction(&["tokens", "token-search"], "USDT", None)).unwrap();
    let hits: Vec<_> = all_text(&screens).into_iter().filter(|l| l.starts_with("Token: ")).collect();
    assert_eq!(hits.len(), 2);
    assert_ne!(hits[0], hits[1]);
}

fn balance_after_edit(profile: &str, decimals: &str) -> String {
    let (mut w, mut s) = wallet(profile);
    let seed = interaction(&["tokens", "token-edit", "token-decimals"], decimals, Some("token-save"));
    let screens = w.submit_interaction(&mut s, &seed).unwrap();
    all_text(&screens).into_iter().find(|l| l.starts_with("Balance: ")).unwrap()
}

#[test]
fn decimals_edit_shrinks_displayed_balance() {
    assert_eq!(balance_after_edit("all-vulnerable", "18"), "Balance: 2 WETH");
    assert_eq!(balance_after_edit("all-vulnerable", "15"), "Balance: 0.002 WETH");
    assert_eq!(balance_after_edit("hardened", "15"), "Balance: 2 WETH");
}

#[test]
fn masked_name_is_auto_suggested() {
    let input = "0x11e4857bb9993a50c685a79afad4e6f65d518dda";
    let seed = interaction(&["send", "send-recipient"], input, Some("send-next"));
    let (mut w, mut s) = wallet("inject-v12");
    let text = all_text(&w.submit_interaction(&mut s, &seed).unwrap());
    assert!(text.iter().any(|l| l.starts_with("Suggested: 0x11e4")));
    assert!(text.contains(&"Recipient: 0xd77a5b5e6c3c1f1e2d0a9b8c7d6e5f4a3b2c1d0e".to_string()));

    let (mut w, mut s) = wallet("hardened");
    let text = all_text(&w.submit_interaction(&mut s, &seed).unwrap());
    assert!(text.contains(&format!("Recipient: {input}")));
}

#[test]
fn reordered_path_is_rejected() {
    let (mut w, mut s) = wallet("hardened");
    let seed = interaction(&["bridge", "swap", "bridge-amount"], "15", Some("bridge-review"));
    let screens = w.submit_interaction(&mut s, &seed).unwrap();
    assert!(!screens[0].changed_from_previous);
}

#[test]
fn identical_inputs_render_identically() {
    let m = mail();
    let run = || {
        let (mut w, mut s) = wallet("metamask-like");
        let mut out = w.submit_message(&mut s, &m).unwrap();
        out.extend(
            w.submit_transaction(&mut s, &tx(USER, "0xf3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3f3", 0, "")).unwrap(),
        );
        out
    };
    assert_eq!(run(), run());
}
