//! Built-in Runge–Kutta methods with published reference values.

use std::sync::OnceLock;

use crate::coef::Coef;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::method_file::MethodDoc;
use crate::scalar::Scalar;
use crate::shu_osher::radius_am;
use crate::tableau::{RKMethod, StructuralClass};
use crate::Rational;

/// Tolerance used when comparing recomputed values against [`Reference`].
pub const REFERENCE_TOL: f64 = 1e-3;

/// Published values (truncated to three decimals) for one method.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Reference {
    pub r_k: Option<f64>,
    pub r_opt: Option<f64>,
    pub bound_max_abs: Option<f64>,
    pub bound_linear_order: Option<f64>,
    pub property_c: Option<bool>,
    pub note: Option<&'static str>,
}

#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub title: &'static str,
    pub source: &'static str,
    /// Float form, always available.
    pub method: RKMethod<f64>,
    /// Exact form when every coefficient is rational.
    pub exact: Option<RKMethod<Rational>>,
    pub reference: Reference,
    pub doc: MethodDoc,
}

impl CatalogEntry {
    pub fn stages(&self) -> usize {
        self.method.stages()
    }

    pub fn order(&self) -> u32 {
        self.method.order()
    }

    /// `R(K)`, computed exactly when the coefficients allow it.
    pub fn radius(&self) -> f64 {
        match &self.exact {
            Some(q) => radius_am(q).to_f64_lossy(),
            None => radius_am(&self.method),
        }
    }
}

/// Published `R̃_{s,p}` for `1 <= p <= s <= 10`, two decimals, indexed
/// `[s − 1][p − 1]`.
pub const THRESHOLD_TABLE: [[f64; 10]; 10] = [
    [1.00, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [2.00, 1.41, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.00, 2.45, 1.60, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [4.00, 3.46, 2.49, 2.00, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [5.00, 4.47, 3.20, 2.94, 2.18, 0.0, 0.0, 0.0, 0.0, 0.0],
    [6.00, 5.48, 4.00, 3.65, 3.11, 2.58, 0.0, 0.0, 0.0, 0.0],
    [7.00, 6.48, 4.86, 4.45, 3.88, 3.55, 2.76, 0.0, 0.0, 0.0],
    [8.00, 7.48, 5.77, 5.31, 4.57, 4.32, 3.72, 3.15, 0.0, 0.0],
    [9.00, 8.49, 6.62, 6.22, 5.24, 5.02, 4.52, 4.14, 3.33, 0.0],
    [10.00, 9.49, 7.42, 7.09, 5.95, 5.70, 5.25, 4.96, 4.32, 3.73],
];

/// Tolerance for comparisons against [`THRESHOLD_TABLE`].
pub const THRESHOLD_TABLE_TOL: f64 = 0.01;

pub fn threshold_reference(s: usize, p: usize) -> Option<f64> {
    (1..=10).contains(&s).then_some(())?;
    (1..=s).contains(&p).then(|| THRESHOLD_TABLE[s - 1][p - 1])
}

struct Raw {
    name: &'static str,
    title: &'static str,
    source: &'static str,
    class: StructuralClass,
    order: u32,
    tableau: Tableau,
    reference: Reference,
}

enum Tableau {
    /// Strictly-lower rows of `A` (row `i` has `i` entries) and `b`.
    Lower(&'static [&'static [&'static str]], &'static [&'static str]),
    Full(&'static [&'static [&'static str]], &'static [&'static str]),
    TwoStage(String),
    Ssp104,
}

const fn reference(r_k: f64, r_opt: f64, bound_max_abs: f64, bound_linear_order: f64, property_c: bool) -> Reference {
    Reference {
        r_k: Some(r_k),
        r_opt: Some(r_opt),
        bound_max_abs: Some(bound_max_abs),
        bound_linear_order: Some(bound_linear_order),
        property_c: Some(property_c),
        note: None,
    }
}

const fn noted(mut r: Reference, note: &'static str) -> Reference {
    r.note = Some(note);
    r
}

fn raw_entries() -> Vec<Raw> {
    use StructuralClass::*;
    use Tableau::*;
    vec![
        Raw {
            name: "forward-euler",
            title: "Forward Euler",
            source: "Euler (1768)",
            class: Explicit,
            order: 1,
            tableau: Lower(&[&[]], &["1"]),
            reference: reference(1.0, 1.0, 1.0, 1.0, true),
        },
        Raw {
            name: "midpoint",
            title: "Midpoint",
            source: "two-stage family, alpha = 1/2",
            class: Explicit,
            order: 2,
            tableau: TwoStage("1/2".into()),
            reference: reference(0.0, 0.732, 1.0, 1.414, true),
        },
        Raw {
            name: "minimal-trunc-2",
            title: "Minimal trunc. error",
            source: "two-stage family, alpha = 2/3",
            class: Explicit,
            order: 2,
            tableau: TwoStage("2/3".into()),
            reference: noted(
                reference(0.5, 1.0, 1.333, 1.414, true),
                "alpha = 2/3 reproduces every published column (R = 1/2, bound 4/3 from b2 = 3/4); \
                 alpha = 3/4 would give R = 2/3",
            ),
        },
        Raw {
            name: "ssp22",
            title: "SSP22",
            source: "Shu & Osher (1988)",
            class: Explicit,
            order: 2,
            tableau: TwoStage("1".into()),
            reference: reference(1.0, 1.0, 1.0, 1.414, true),
        },
        Raw {
            name: "ssp22star",
            title: "SSP22*",
            source: "Gottlieb (2006); two-stage family, alpha = (sqrt(7)-1)/2",
            class: Explicit,
            order: 2,
            tableau: TwoStage("(sqrt(7)-1)/2".into()),
            reference: noted(
                reference(0.784, 1.215, 1.215, 1.414, true),
                "the optimal perturbation has b~1 != 0 in a column where K is nonzero, \
                 so the column-disjointness predicate evaluates to false",
            ),
        },
        Raw {
            name: "heun33",
            title: "Heun33",
            source: "Heun (1900)",
            class: Explicit,
            order: 3,
            tableau: Lower(&[&[], &["1/3"], &["0", "2/3"]], &["1/4", "0", "3/4"]),
            reference: reference(0.0, 0.776, 1.333, 1.817, false),
        },
        Raw {
            name: "ssp33",
            title: "SSP33",
            source: "Shu & Osher (1988)",
            class: Explicit,
            order: 3,
            tableau: Lower(&[&[], &["1"], &["1/4", "1/4"]], &["1/6", "1/6", "2/3"]),
            reference: reference(1.0, 1.0, 1.0, 1.817, true),
        },
        Raw {
            name: "rk44",
            title: "RK44 (Kutta)",
            source: "Kutta (1901)",
            class: Explicit,
            order: 4,
            tableau: Lower(&[&[], &["1/2"], &["0", "1/2"], &["0", "0", "1"]], &["1/6", "1/3", "1/3", "1/6"]),
            reference: reference(0.0, 0.685, 1.0, 2.213, false),
        },
        Raw {
            name: "merson45",
            title: "Merson",
            source: "Merson (1957)",
            class: Explicit,
            order: 4,
            tableau: Lower(
                &[&[], &["1/3"], &["1/6", "1/6"], &["1/8", "0", "3/8"], &["1/2", "0", "-3/2", "2"]],
                &["1/6", "0", "0", "2/3", "1/6"],
            ),
            reference: reference(0.0, 0.242, 0.5, 3.309, false),
        },
        Raw {
            name: "ssp104",
            title: "SSP104",
            source: "Ketcheson (2008)",
            class: Explicit,
            order: 4,
            tableau: Ssp104,
            reference: reference(6.0, 6.0, 6.0, 8.425, false),
        },
        Raw {
            name: "fehlberg45",
            title: "Fehlberg",
            source: "Fehlberg (1969), fifth-order weights",
            class: Explicit,
            order: 5,
            tableau: Lower(
                &[
                    &[],
                    &["1/4"],
                    &["3/32", "9/32"],
                    &["1932/2197", "-7200/2197", "7296/2197"],
                    &["439/216", "-8", "3680/513", "-845/4104"],
                    &["-8/27", "2", "-3544/2565", "1859/4104", "-11/40"],
                ],
                &["16/135", "0", "6656/12825", "28561/56430", "-9/50", "2/55"],
            ),
            reference: reference(0.0, 0.057, 0.125, 3.727, false),
        },
        Raw {
            name: "dormand-prince5",
            title: "Dormand-Prince",
            source: "Dormand & Prince (1980)",
            class: Explicit,
            order: 5,
            tableau: Lower(
                &[
                    &[],
                    &["1/5"],
                    &["3/40", "9/40"],
                    &["44/45", "-56/15", "32/9"],
                    &["19372/6561", "-25360/2187", "64448/6561", "-212/729"],
                    &["9017/3168", "-355/33", "46732/5247", "49/176", "-5103/18656"],
                    &["35/384", "0", "500/1113", "125/192", "-2187/6784", "11/84"],
                ],
                &["35/384", "0", "500/1113", "125/192", "-2187/6784", "11/84", "0"],
            ),
            reference: reference(0.0, 0.040, 0.086, 4.789, false),
        },
        Raw {
            name: "bogacki5",
            title: "Bogacki",
            source: "Bogacki & Shampine (1996), fifth-order weights",
            class: Explicit,
            order: 5,
            tableau: Lower(
                &[
                    &[],
                    &["1/6"],
                    &["2/27", "4/27"],
                    &["183/1372", "-162/343", "1053/1372"],
                    &["68/297", "-4/11", "42/143", "1960/3861"],
                    &["597/22528", "81/352", "63099/585728", "58653/366080", "4617/20480"],
                    &[
                        "174197/959244",
                        "-30942/79937",
                        "8152137/19744439",
                        "666106/1039181",
                        "-29421/29068",
                        "482048/414219",
                    ],
                    &["587/8064", "0", "4440339/15491840", "24353/124800", "387/44800", "2152/5985", "7267/94080"],
                ],
                &["587/8064", "0", "4440339/15491840", "24353/124800", "387/44800", "2152/5985", "7267/94080", "0"],
            ),
            reference: reference(0.0, 0.313, 0.859, 5.827, false),
        },
        Raw {
            name: "ssp75",
            title: "SSP75",
            source: "Ruuth (2006), 15-digit coefficients",
            class: Explicit,
            order: 5,
            tableau: Lower(
                &[
                    &[],
                    &["0.39238220805401"],
                    &["0.310348765296963", "0.523846724909595"],
                    &["0.114817342432177", "0.248293597111781", "0"],
                    &["0.136041285050893", "0.163250087363657", "0", "0.557898557725281"],
                    &["0.135252145083336", "0.20727408309754", "-0.180995372278096", "0.326486467604174", "0.348595427190109"],
                    &[
                        "0.082675687408986",
                        "0.14647232885896",
                        "-0.160507707995237",
                        "0.161924299217425",
                        "0.028864227879979",
                        "0.070259587451358",
                    ],
                ],
                &[
                    "0.110184169931401",
                    "0.122082833871843",
                    "-0.117309105328437",
                    "0.169714358772186",
                    "0.143346980044187",
                    "0.348926696469455",
                    "0.223054066239366",
                ],
            ),
            reference: reference(0.0, 1.396, 1.792, 4.789, false),
        },
        Raw {
            name: "ssp85",
            title: "SSP85",
            source: "Ruuth (2006), 15-digit coefficients",
            class: Explicit,
            order: 5,
            tableau: Lower(
                &[
                    &[],
                    &["0.276409720937984"],
                    &["0.149896412080489", "0.289119929124728"],
                    &["0.057048148321026", "0.11003436553515", "0.202903911101136"],
                    &["0.169059298369086", "0.326081269617717", "0.450795162456598", "0"],
                    &["0.061792381825461", "0.119185034557281", "0.199236908877949", "0.521072746262762", "-0.001094028365068"],
                    &[
                        "0.11104872476505",
                        "0.214190579933444",
                        "0.116299126401843",
                        "0.223170535417453",
                        "-0.037093067908355",
                        "0.228338214162494",
                    ],
                    &[
                        "0.071096701602448",
                        "0.137131189752988",
                        "0.154859800527808",
                        "0.043090968302309",
                        "-0.163751550364691",
                        "0.044088771531945",
                        "0.102941265156393",
                    ],
                ],
                &[
                    "0.107263534301213",
                    "0.14890816641081",
                    "0.105268730914375",
                    "0.124847526215373",
                    "-0.068303238298102",
                    "0.127738462988848",
                    "0.298251879839231",
                    "0.156024937628252",
                ],
            ),
            reference: reference(0.0, 1.875, 1.919, 5.827, true),
        },
        Raw {
            name: "ssp95",
            title: "SSP95",
            source: "Ruuth (2006), 15-digit coefficients",
            class: Explicit,
            order: 5,
            tableau: Lower(
                &[
                    &[],
                    &["0.234806766829933"],
                    &["0.110753442788106", "0.174968893063956"],
                    &["0.050146926953296", "0.079222388746543", "0.167958236726863"],
                    &["0.143763164125647", "0.227117830897242", "0.240798769812556", "0"],
                    &["0.045536733856107", "0.07193918054353", "0.143881583463234", "0.298694357327376", "-0.013308014505658"],
                    &[
                        "0.058996301344129",
                        "0.093202678681501",
                        "0.109350748582257",
                        "0.227009258480886",
                        "-0.010114159945349",
                        "0.281923169534861",
                    ],
                    &[
                        "0.114111232336224",
                        "0.18027354730843",
                        "0.132484700103381",
                        "0.107410821979346",
                        "-0.129172321959971",
                        "0.133393675559324",
                        "0.175516798122502",
                    ],
                    &[
                        "0.096188287148324",
                        "0.151958780732981",
                        "0.11167591581831",
                        "0.090540280530361",
                        "-0.108883798219725",
                        "0.112442122530629",
                        "0.147949153045843",
                        "0.312685695043563",
                    ],
                ],
                &[
                    "0.088934582057735",
                    "0.102812792947845",
                    "0.111137942621198",
                    "0.158704526123705",
                    "-0.060510182639384",
                    "0.197095410661808",
                    "0.071489672566698",
                    "0.151091084299943",
                    "0.179244171360452",
                ],
            ),
            reference: reference(0.0, 2.738, 3.198, 6.853, false),
        },
        Raw {
            name: "trapezoid",
            title: "Implicit trapezoid",
            source: "Crank & Nicolson (1947)",
            class: DiagonallyImplicit,
            order: 2,
            tableau: Full(&[&["0", "0"], &["1/2", "1/2"]], &["1/2", "1/2"]),
            reference: Reference::default(),
        },
    ]
}

fn parse_all(v: &[&str]) -> Vec<Coef> {
    v.iter().map(|s| Coef::parse(s).expect("catalog literal")).collect()
}

fn build_doc(raw: &Raw) -> MethodDoc {
    let (a, b) = match &raw.tableau {
        Tableau::Lower(rows, b) => (rows.iter().map(|r| parse_all(r)).collect(), parse_all(b)),
        Tableau::Full(rows, b) => (rows.iter().map(|r| parse_all(r)).collect(), parse_all(b)),
        Tableau::TwoStage(alpha) => {
            let alpha = Coef::parse(alpha).expect("catalog literal");
            let b2 = Coef::parse(&format!("1/(2*({}))", alpha.source())).expect("catalog literal");
            let b1 = Coef::parse(&format!("1-1/(2*({}))", alpha.source())).expect("catalog literal");
            (vec![vec![], vec![alpha]], vec![b1, b2])
        }
        Tableau::Ssp104 => {
            let a = (0..10)
                .map(|i| {
                    (0..i)
                        .map(|j| Coef::parse(if i >= 5 && j < 5 { "1/15" } else { "1/6" }).expect("literal"))
                        .collect()
                })
                .collect();
            (a, vec![Coef::parse("1/10").expect("literal"); 10])
        }
    };
    MethodDoc { name: raw.name.to_string(), class: raw.class, order: raw.order, a, b, a_tilde: None, b_tilde: None }
}

fn entries() -> &'static [CatalogEntry] {
    static CELL: OnceLock<Vec<CatalogEntry>> = OnceLock::new();
    CELL.get_or_init(|| {
        raw_entries()
            .into_iter()
            .map(|raw| {
                let doc = build_doc(&raw);
                let method = doc.method::<f64>().expect("catalog entry validates");
                let exact = doc.is_exact().then(|| doc.method::<Rational>().expect("catalog entry validates"));
                CatalogEntry {
                    name: raw.name,
                    title: raw.title,
                    source: raw.source,
                    method,
                    exact,
                    reference: raw.reference,
                    doc,
                }
            })
            .collect()
    })
}

/// Entry names in catalog order.
pub fn list() -> Vec<&'static str> {
    entries().iter().map(|e| e.name).collect()
}

pub fn all() -> &'static [CatalogEntry] {
    entries()
}

/// Look up an entry by name (case-insensitive). `two-stage(<alpha>)` builds
/// a member of the two-stage second-order family on the fly.
pub fn get(name: &str) -> Result<CatalogEntry> {
    let key = name.trim().to_ascii_lowercase();
    if let Some(alpha) = key.strip_prefix("two-stage(").and_then(|s| s.strip_suffix(')')) {
        return two_stage_entry(alpha);
    }
    entries().iter().find(|e| e.name == key).cloned().ok_or_else(|| Error::UnknownMethod(name.to_string()))
}

fn two_stage_entry(alpha: &str) -> Result<CatalogEntry> {
    let c = Coef::parse(alpha)?;
    if c.is_zero() {
        return Err(Error::DomainError("two-stage family needs alpha != 0".into()));
    }
    let raw = Raw {
        name: "two-stage",
        title: "two-stage second-order family",
        source: "two-stage family",
        class: StructuralClass::Explicit,
        order: 2,
        tableau: Tableau::TwoStage(c.source().to_string()),
        reference: Reference::default(),
    };
    let mut doc = build_doc(&raw);
    doc.name = format!("two-stage({})", c.source());
    let method = doc.method::<f64>()?;
    let exact = doc.is_exact().then(|| doc.method::<Rational>()).transpose()?;
    Ok(CatalogEntry { name: "two-stage", title: raw.title, source: raw.source, method, exact, reference: raw.reference, doc })
}

/// The two-stage second-order family: `a21 = α`, `b = (1 − 1/(2α), 1/(2α))`.
///
/// # Panics
/// If `alpha` is zero.
pub fn two_stage<T: Scalar>(alpha: T) -> RKMethod<T> {
    assert!(!alpha.is_zero(), "alpha must be nonzero");
    let b2 = T::one() / (T::two() * alpha.clone());
    let mut a = Matrix::zeros(2, 2);
    a[(1, 0)] = alpha;
    RKMethod::new("two-stage", StructuralClass::Explicit, 2, a, vec![T::one() - b2.clone(), b2]).expect("valid family member")
}
