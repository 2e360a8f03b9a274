//! Session file schema and name resolution.

use std::collections::{BTreeMap, BTreeSet};

use paradiff::atiyah::ProlongedModule;
use paradiff::conn::{DiffModule, ModMorphism};
use paradiff::diffstruct::{
    build_param_structure, build_structure, Derivation, DiffError, DiffMorphism, ParamStructure,
};
use paradiff::field::{FieldSpec, RatFun};
use paradiff::matrix::Matrix;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SessionFile {
    #[serde(default, rename = "structure")]
    pub structures: Vec<StructureDef>,
    #[serde(default, rename = "map")]
    pub maps: Vec<MapDef>,
    #[serde(default, rename = "module")]
    pub modules: Vec<ModuleDef>,
    #[serde(default, rename = "morphism")]
    pub morphisms: Vec<MorphismDef>,
    #[serde(default, rename = "command")]
    pub commands: Vec<toml::Table>,
}

/// Derivations are coefficient rows, one entry per variable.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct StructureDef {
    pub name: String,
    pub variables: Vec<String>,
    pub principal: Vec<Vec<String>>,
    #[serde(default)]
    pub parameter: Vec<Vec<String>>,
    #[serde(default)]
    pub constants: Vec<String>,
}

/// A morphism of differential fields: images of the source variables and
/// the push-forward of the source 1-form basis (target rows, source columns).
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MapDef {
    pub name: String,
    pub source: String,
    pub target: String,
    pub images: Vec<String>,
    pub omega: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ModuleDef {
    pub name: String,
    pub structure: String,
    pub rank: usize,
    /// One matrix per principal derivation, as rows.
    pub matrices: Vec<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prolonged: Option<ProlongedDef>,
}

/// Exact-sequence data of a first prolongation.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProlongedDef {
    pub parent_rank: usize,
    pub q: usize,
    pub incl: Vec<Vec<String>>,
    pub proj: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismDef {
    pub name: String,
    pub src: String,
    pub dst: String,
    pub matrix: Vec<Vec<String>>,
}

pub struct StructureEntry {
    pub def: StructureDef,
    pub field: FieldSpec,
    /// Construction failures are reported by `check-structure`.
    pub built: Result<ParamStructure, DiffError>,
}

pub struct MapEntry {
    pub map: DiffMorphism,
    pub source: String,
    pub target: String,
}

#[derive(Clone)]
pub struct ModuleEntry {
    pub structure: String,
    pub module: DiffModule,
    pub prolonged: Option<ProlongedModule>,
}

pub struct MorphismEntry {
    pub morphism: ModMorphism,
    pub src: String,
    pub dst: String,
}

/// A loaded session: every definition parsed and resolved.
pub struct Session {
    pub digest: String,
    pub structures: BTreeMap<String, StructureEntry>,
    pub maps: BTreeMap<String, MapEntry>,
    pub modules: BTreeMap<String, ModuleEntry>,
    pub morphisms: BTreeMap<String, MorphismEntry>,
    pub commands: Vec<toml::Table>,
    names: BTreeSet<String>,
}

fn semantic(msg: impl Into<String>) -> CliError {
    CliError::Semantic(msg.into())
}

pub(crate) fn parse_entry(field: &FieldSpec, text: &str, at: &str) -> Result<RatFun, CliError> {
    field.parse(text).map_err(|e| CliError::Expr {
        location: at.to_string(),
        position: e.position,
        expected: e.expected,
        found: e.found,
    })
}

pub(crate) fn parse_matrix(
    field: &FieldSpec,
    rows: &[Vec<String>],
    shape: (usize, usize),
    at: &str,
) -> Result<Matrix, CliError> {
    if rows.len() != shape.0 {
        return Err(semantic(format!(
            "{at}: expected {} rows, found {}",
            shape.0,
            rows.len()
        )));
    }
    let mut out = Vec::with_capacity(rows.len());
    for (r, row) in rows.iter().enumerate() {
        if row.len() != shape.1 {
            return Err(semantic(format!(
                "{at}[{r}]: expected {} entries, found {}",
                shape.1,
                row.len()
            )));
        }
        let parsed = row
            .iter()
            .enumerate()
            .map(|(c, s)| parse_entry(field, s, &format!("{at}[{r}][{c}]")))
            .collect::<Result<Vec<_>, _>>()?;
        out.push(parsed);
    }
    Ok(if shape.0 == 0 {
        Matrix::zeros(0, shape.1)
    } else {
        Matrix::from_rows(out)
    })
}

fn parse_derivations(
    field: &FieldSpec,
    rows: &[Vec<String>],
    at: &str,
) -> Result<Vec<Derivation>, CliError> {
    rows.iter()
        .enumerate()
        .map(|(k, row)| {
            if row.len() != field.len() {
                return Err(semantic(format!(
                    "{at}[{k}]: expected {} coefficients, found {}",
                    field.len(),
                    row.len()
                )));
            }
            let coeffs = row
                .iter()
                .enumerate()
                .map(|(c, s)| parse_entry(field, s, &format!("{at}[{k}][{c}]")))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Derivation::new(coeffs))
        })
        .collect()
}

/// Converts a TOML span into a 1-based line and column.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

pub(crate) fn digest(text: &str) -> String {
    use sha2::{Digest, Sha256};
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl Session {
    pub fn load(text: &str) -> Result<Session, CliError> {
        let file: SessionFile = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            CliError::Toml {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        let mut s = Session {
            digest: digest(text),
            structures: BTreeMap::new(),
            maps: BTreeMap::new(),
            modules: BTreeMap::new(),
            morphisms: BTreeMap::new(),
            commands: file.commands,
            names: BTreeSet::new(),
        };
        for d in file.structures {
            s.add_structure(d)?;
        }
        for d in file.maps {
            s.add_map(d)?;
        }
        for d in file.modules {
            s.add_module(d)?;
        }
        for d in file.morphisms {
            s.add_morphism(d)?;
        }
        Ok(s)
    }

    pub(crate) fn claim(&mut self, name: &str) -> Result<(), CliError> {
        if name.is_empty() {
            return Err(semantic("empty name"));
        }
        if !self.names.insert(name.to_string()) {
            return Err(semantic(format!("name `{name}` is defined twice")));
        }
        Ok(())
    }

    fn add_structure(&mut self, d: StructureDef) -> Result<(), CliError> {
        self.claim(&d.name)?;
        let field = FieldSpec::new(&d.variables)
            .map_err(|e| semantic(format!("structure `{}`: {e}", d.name)))?;
        let at = format!("structure `{}`", d.name);
        let principal = parse_derivations(&field, &d.principal, &format!("{at} principal"))?;
        let parameter = parse_derivations(&field, &d.parameter, &format!("{at} parameter"))?;
        let constants: Vec<&str> = d.constants.iter().map(String::as_str).collect();
        // the full closure check keeps its residual; the parameterized build
        // reports a non-closed basis only as non-commuting
        let basis: Vec<Derivation> = principal.iter().chain(&parameter).cloned().collect();
        let built = match build_structure(&field, basis) {
            Err(e @ DiffError::NotClosed { .. }) => Err(e),
            _ => build_param_structure(&field, principal, parameter, &constants),
        };
        if let Err(DiffError::Field(e)) = &built {
            return Err(semantic(format!("{at}: {e}")));
        }
        self.structures
            .insert(d.name.clone(), StructureEntry { def: d, field, built });
        Ok(())
    }

    pub fn structure(&self, name: &str) -> Result<&ParamStructure, CliError> {
        let entry = self
            .structures
            .get(name)
            .ok_or_else(|| semantic(format!("undefined structure `{name}`")))?;
        entry
            .built
            .as_ref()
            .map_err(|e| semantic(format!("structure `{name}` is invalid: {e}")))
    }

    fn add_map(&mut self, d: MapDef) -> Result<(), CliError> {
        self.claim(&d.name)?;
        let at = format!("map `{}`", d.name);
        let src = self.structure(&d.source)?.full().clone();
        let dst = self.structure(&d.target)?.full().clone();
        if d.images.len() != src.base().len() {
            return Err(semantic(format!(
                "{at}: expected {} images, found {}",
                src.base().len(),
                d.images.len()
            )));
        }
        let images = d
            .images
            .iter()
            .enumerate()
            .map(|(k, s)| parse_entry(dst.base(), s, &format!("{at} images[{k}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let omega = parse_matrix(
            dst.base(),
            &d.omega,
            (dst.dim(), src.dim()),
            &format!("{at} omega"),
        )?;
        let map = DiffMorphism::new(src, dst, images, omega)
            .map_err(|e| semantic(format!("{at}: {e}")))?;
        self.maps.insert(
            d.name,
            MapEntry {
                map,
                source: d.source,
                target: d.target,
            },
        );
        Ok(())
    }

    pub(crate) fn add_module(&mut self, d: ModuleDef) -> Result<(), CliError> {
        self.claim(&d.name)?;
        let at = format!("module `{}`", d.name);
        let ps = self.structure(&d.structure)?.clone();
        let field = ps.base().clone();
        if d.matrices.len() != ps.principal_count() {
            return Err(semantic(format!(
                "{at}: expected {} matrices, found {}",
                ps.principal_count(),
                d.matrices.len()
            )));
        }
        let conn = d
            .matrices
            .iter()
            .enumerate()
            .map(|(i, rows)| {
                parse_matrix(&field, rows, (d.rank, d.rank), &format!("{at} matrices[{i}]"))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let module =
            DiffModule::new(ps, d.rank, conn).map_err(|e| semantic(format!("{at}: {e}")))?;
        let prolonged = match &d.prolonged {
            None => None,
            Some(p) => {
                if p.parent_rank * (1 + p.q) != d.rank {
                    return Err(semantic(format!(
                        "{at}: rank {} does not match parent rank {} with {} parameters",
                        d.rank, p.parent_rank, p.q
                    )));
                }
                let incl = parse_matrix(
                    &field,
                    &p.incl,
                    (d.rank, p.parent_rank * p.q),
                    &format!("{at} prolonged.incl"),
                )?;
                let proj = parse_matrix(
                    &field,
                    &p.proj,
                    (p.parent_rank, d.rank),
                    &format!("{at} prolonged.proj"),
                )?;
                Some(ProlongedModule {
                    core: module.clone(),
                    parent_rank: p.parent_rank,
                    q: p.q,
                    incl,
                    proj,
                })
            }
        };
        self.modules.insert(
            d.name,
            ModuleEntry {
                structure: d.structure,
                module,
                prolonged,
            },
        );
        Ok(())
    }

    pub fn module(&self, name: &str) -> Result<&ModuleEntry, CliError> {
        self.modules
            .get(name)
            .ok_or_else(|| semantic(format!("undefined module `{name}`")))
    }

    fn add_morphism(&mut self, d: MorphismDef) -> Result<(), CliError> {
        self.claim(&d.name)?;
        let at = format!("morphism `{}`", d.name);
        let src = self.module(&d.src)?.clone();
        let dst = self.module(&d.dst)?.clone();
        let field = src.module.ps().base().clone();
        let t = parse_matrix(
            &field,
            &d.matrix,
            (dst.module.rank(), src.module.rank()),
            &format!("{at} matrix"),
        )?;
        let morphism = ModMorphism::new(src.module, dst.module, t)
            .map_err(|e| semantic(format!("{at}: {e}")))?;
        self.morphisms.insert(
            d.name,
            MorphismEntry {
                morphism,
                src: d.src,
                dst: d.dst,
            },
        );
        Ok(())
    }

    pub fn morphism(&self, name: &str) -> Result<&MorphismEntry, CliError> {
        self.morphisms
            .get(name)
            .ok_or_else(|| semantic(format!("undefined morphism `{name}`")))
    }

    pub fn map(&self, name: &str) -> Result<&MapEntry, CliError> {
        self.maps
            .get(name)
            .ok_or_else(|| semantic(format!("undefined map `{name}`")))
    }
}

/// Serializable form of a module, in session syntax.
pub fn module_def(name: &str, structure: &str, m: &DiffModule) -> ModuleDef {
    let field = m.ps().base();
    ModuleDef {
        name: name.to_string(),
        structure: structure.to_string(),
        rank: m.rank(),
        matrices: m.matrices().iter().map(|a| a.render_rows(field)).collect(),
        prolonged: None,
    }
}

pub fn prolonged_def(name: &str, structure: &str, p: &ProlongedModule) -> ModuleDef {
    let field = p.core.ps().base();
    ModuleDef {
        prolonged: Some(ProlongedDef {
            parent_rank: p.parent_rank,
            q: p.q,
            incl: p.incl.render_rows(field),
            proj: p.proj.render_rows(field),
        }),
        ..module_def(name, structure, &p.core)
    }
}

/// Loads `def` against the structures declared in the session text `source`.
pub fn reingest(source: &str, def: &ModuleDef) -> Result<ModuleEntry, CliError> {
    let file: SessionFile = toml::from_str(source).map_err(|e| CliError::Toml {
        line: 0,
        column: 0,
        message: e.message().to_string(),
    })?;
    let text = toml::to_string(&SessionFile {
        structures: file.structures,
        modules: vec![def.clone()],
        ..SessionFile::default()
    })
    .map_err(|e| semantic(format!("cannot serialize module `{}`: {e}", def.name)))?;
    Ok(Session::load(&text)?.module(&def.name)?.clone())
}
