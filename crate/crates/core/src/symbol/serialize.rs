use serde::ser::{Serialize, SerializeStruct, Serializer};

use super::SymbolExpr;

#[derive(serde::Serialize)]
struct OpaqueJson<'a> {
    name: &'a str,
    xi_derivs: u32,
    x_derivs: u32,
    power: u32,
}

#[derive(serde::Serialize)]
struct GaugeJson<'a> {
    name: &'a str,
    power: i32,
}

#[derive(serde::Serialize)]
struct TermJson<'a> {
    xi: i32,
    xi_s: i8,
    unit_bracket: i32,
    unit_bracket_s: i8,
    ell_bracket: i32,
    ell: u32,
    opaques: Vec<OpaqueJson<'a>>,
    gauge: Vec<GaugeJson<'a>>,
    coeff: String,
}

impl Serialize for SymbolExpr {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let terms: Vec<TermJson<'_>> = self
            .terms
            .iter()
            .map(|(s, c)| TermJson {
                xi: s.xi,
                xi_s: s.xi_s,
                unit_bracket: s.jb,
                unit_bracket_s: s.jb_s,
                ell_bracket: s.lb,
                ell: s.ell,
                opaques: s
                    .opaques
                    .iter()
                    .map(|(a, e)| OpaqueJson {
                        name: a.name.as_str(),
                        xi_derivs: a.xi_derivs,
                        x_derivs: a.x_derivs,
                        power: *e,
                    })
                    .collect(),
                gauge: s.gauge.iter().map(|(g, p)| GaugeJson { name: g.as_str(), power: *p }).collect(),
                coeff: c.dump_inline(),
            })
            .collect();
        let mut st = ser.serialize_struct("SymbolExpr", 2)?;
        st.serialize_field("mode", &self.mode)?;
        st.serialize_field("terms", &terms)?;
        st.end()
    }
}
