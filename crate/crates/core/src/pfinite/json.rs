use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::{DiffOpD, PfiniteError, PolyRec, ThetaOde};
use crate::poly::IntPoly;

/// Wire form shared by all three operator kinds.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorJson {
    pub kind: String,
    pub order: usize,
    pub degree: usize,
    pub coeffs: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Operator {
    Rec(PolyRec),
    Theta(ThetaOde),
    D(DiffOpD),
}

fn encode(coeffs: &[IntPoly]) -> Vec<Vec<String>> {
    coeffs.iter().map(|p| p.coeffs().iter().map(|c| c.to_string()).collect()).collect()
}

fn decode(coeffs: &[Vec<String>]) -> Result<Vec<IntPoly>, PfiniteError> {
    coeffs
        .iter()
        .map(|p| {
            p.iter()
                .map(|s| s.parse::<BigInt>().map_err(|_| PfiniteError::Json(format!("bad integer {s:?}"))))
                .collect::<Result<Vec<_>, _>>()
                .map(IntPoly::new)
        })
        .collect()
}

impl Operator {
    pub fn kind(&self) -> &'static str {
        match self {
            Operator::Rec(_) => "rec",
            Operator::Theta(_) => "theta-ode",
            Operator::D(_) => "d-ode",
        }
    }

    pub fn order(&self) -> usize {
        match self {
            Operator::Rec(r) => r.order(),
            Operator::Theta(t) => t.order(),
            Operator::D(d) => d.order(),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            Operator::Rec(r) => r.degree(),
            Operator::Theta(t) => t.degree(),
            Operator::D(d) => d.degree(),
        }
    }

    fn coeffs(&self) -> &[IntPoly] {
        match self {
            Operator::Rec(r) => r.coeffs(),
            Operator::Theta(t) => t.coeffs(),
            Operator::D(d) => d.coeffs(),
        }
    }

    pub fn to_json(&self) -> OperatorJson {
        OperatorJson {
            kind: self.kind().to_string(),
            order: self.order(),
            degree: self.degree(),
            coeffs: encode(self.coeffs()),
        }
    }

    pub fn from_json(j: &OperatorJson) -> Result<Self, PfiniteError> {
        let coeffs = decode(&j.coeffs)?;
        let op = match j.kind.as_str() {
            "rec" => Operator::Rec(PolyRec::new(coeffs)?),
            "theta-ode" => Operator::Theta(ThetaOde::new(coeffs)?),
            "d-ode" => Operator::D(DiffOpD::new(coeffs)?),
            k => return Err(PfiniteError::Json(format!("unknown kind {k:?}"))),
        };
        if op.order() != j.order || op.degree() != j.degree {
            return Err(PfiniteError::Json(format!(
                "declared order/degree ({}, {}) disagree with coefficients ({}, {})",
                j.order,
                j.degree,
                op.order(),
                op.degree()
            )));
        }
        Ok(op)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("operator json serializes")
    }

    pub fn from_json_str(s: &str) -> Result<Self, PfiniteError> {
        let j: OperatorJson = serde_json::from_str(s).map_err(|e| PfiniteError::Json(e.to_string()))?;
        Self::from_json(&j)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let rec = PolyRec::from_i64(&[&[1, 1], &[2, -4]]).unwrap();
        let s = Operator::Rec(rec.clone()).to_json_string();
        assert!(s.contains("\"kind\": \"rec\""));
        assert_eq!(Operator::from_json_str(&s).unwrap(), Operator::Rec(rec));
        let bad = r#"{"kind":"rec","order":2,"degree":1,"coeffs":[["1","1"],["2","-4"]]}"#;
        assert!(Operator::from_json_str(bad).is_err());
        let d = r#"{"kind":"d-ode","order":1,"degree":1,"coeffs":[["0"],["0","1"]]}"#;
        assert!(matches!(Operator::from_json_str(d).unwrap(), Operator::D(_)));
    }
}
