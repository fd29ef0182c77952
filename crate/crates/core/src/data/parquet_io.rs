//! Parquet reading (any encoding the parquet crate decodes) and plain, uncompressed writing.

use std::sync::Arc;

use bytes::Bytes;
use parquet::basic::{Compression, ConvertedType, Encoding, LogicalType, Repetition, Type as PhysicalType};
use parquet::data_type::{ByteArray, ByteArrayType, DoubleType, FloatType};
use parquet::file::properties::{WriterProperties, WriterVersion};
use parquet::file::reader::{FileReader, SerializedFileReader};
use parquet::file::writer::SerializedFileWriter;
use parquet::record::Field;
use parquet::schema::types::Type;

use super::column::{Column, ColumnData, ColumnTable};
use super::infer::RawCell;
use super::ingest::RawTable;
use crate::error::{Error, Position, Result};

fn ingest_err(e: parquet::errors::ParquetError) -> Error {
    Error::ingest(Position::Unknown, format!("parquet: {e}"))
}

fn field_cell(f: &Field) -> RawCell {
    match f {
        Field::Null => RawCell::Null,
        Field::Bool(b) => RawCell::Str(b.to_string()),
        Field::Byte(v) => RawCell::Num(*v as f64),
        Field::Short(v) => RawCell::Num(*v as f64),
        Field::Int(v) => RawCell::Num(*v as f64),
        Field::Long(v) => RawCell::Num(*v as f64),
        Field::UByte(v) => RawCell::Num(*v as f64),
        Field::UShort(v) => RawCell::Num(*v as f64),
        Field::UInt(v) => RawCell::Num(*v as f64),
        Field::ULong(v) => RawCell::Num(*v as f64),
        Field::Float16(v) => RawCell::Num(f64::from(*v)),
        Field::Float(v) => RawCell::Num(*v as f64),
        Field::Double(v) => RawCell::Num(*v),
        Field::Str(s) => RawCell::Str(s.clone()),
        Field::Bytes(b) => RawCell::Str(String::from_utf8_lossy(b.data()).into_owned()),
        Field::ListInternal(list) => RawCell::List(
            list.elements()
                .iter()
                .map(|e| match e {
                    Field::ListInternal(_) | Field::Group(_) | Field::MapInternal(_) => {
                        RawCell::Str(e.to_string())
                    }
                    other => field_cell(other),
                })
                .collect(),
        ),
        Field::Group(_) | Field::MapInternal(_) => RawCell::Str(f.to_string()),
        other => RawCell::Str(other.to_string()),
    }
}

pub(crate) fn read_raw(source: &[u8]) -> Result<RawTable> {
    let reader = SerializedFileReader::new(Bytes::copy_from_slice(source)).map_err(ingest_err)?;
    let schema = reader.metadata().file_metadata().schema();
    let names: Vec<String> = schema.get_fields().iter().map(|f| f.name().to_string()).collect();
    let mut columns: Vec<Vec<RawCell>> = vec![Vec::new(); names.len()];
    let mut row_count = 0usize;
    let rows = reader.get_row_iter(None).map_err(ingest_err)?;
    for (i, row) in rows.enumerate() {
        let row = row.map_err(|e| Error::ingest(Position::Row(i as u64 + 1), format!("parquet: {e}")))?;
        for (col, (_, field)) in columns.iter_mut().zip(row.get_column_iter()) {
            col.push(field_cell(field));
        }
        row_count += 1;
    }
    Ok(RawTable {
        names,
        columns,
        row_count,
    })
}

fn string_type(name: &str, repetition: Repetition) -> Result<Type> {
    Type::primitive_type_builder(name, PhysicalType::BYTE_ARRAY)
        .with_repetition(repetition)
        .with_logical_type(Some(LogicalType::String))
        .with_converted_type(ConvertedType::UTF8)
        .build()
        .map_err(|e| Error::Schema(e.to_string()))
}

fn list_type(name: &str, element: Type) -> Result<Type> {
    let list = Type::group_type_builder("list")
        .with_repetition(Repetition::REPEATED)
        .with_fields(vec![Arc::new(element)])
        .build()
        .map_err(|e| Error::Schema(e.to_string()))?;
    Type::group_type_builder(name)
        .with_repetition(Repetition::OPTIONAL)
        .with_logical_type(Some(LogicalType::List))
        .with_converted_type(ConvertedType::LIST)
        .with_fields(vec![Arc::new(list)])
        .build()
        .map_err(|e| Error::Schema(e.to_string()))
}

fn column_type(col: &Column) -> Result<Type> {
    let name = col.name();
    let schema_err = |e: parquet::errors::ParquetError| Error::Schema(e.to_string());
    match col.data() {
        ColumnData::Numerical(_) => Type::primitive_type_builder(name, PhysicalType::DOUBLE)
            .with_repetition(Repetition::OPTIONAL)
            .build()
            .map_err(schema_err),
        ColumnData::Categorical { .. } | ColumnData::Text(_) => string_type(name, Repetition::OPTIONAL),
        ColumnData::MultiCategorical { .. } => list_type(name, string_type("element", Repetition::REQUIRED)?),
        ColumnData::Vector { .. } => list_type(
            name,
            Type::primitive_type_builder("element", PhysicalType::FLOAT)
                .with_repetition(Repetition::REQUIRED)
                .build()
                .map_err(schema_err)?,
        ),
    }
}

/// Writes the selected rows with plain encoding and no compression.
pub(crate) fn write<W: std::io::Write + Send>(table: &ColumnTable, rows: &[usize], sink: W) -> Result<()> {
    let fields = table
        .columns()
        .iter()
        .map(|c| column_type(c).map(Arc::new))
        .collect::<Result<Vec<_>>>()?;
    let schema = Type::group_type_builder("schema")
        .with_fields(fields)
        .build()
        .map_err(|e| Error::Schema(e.to_string()))?;
    let props = WriterProperties::builder()
        .set_writer_version(WriterVersion::PARQUET_1_0)
        .set_dictionary_enabled(false)
        .set_encoding(Encoding::PLAIN)
        .set_compression(Compression::UNCOMPRESSED)
        .build();
    let to_io = |e: parquet::errors::ParquetError| match e {
        parquet::errors::ParquetError::External(inner) => match inner.downcast::<std::io::Error>() {
            Ok(io) => Error::Io(*io),
            Err(other) => Error::Io(std::io::Error::other(other)),
        },
        other => Error::Io(std::io::Error::other(other)),
    };
    let mut writer = SerializedFileWriter::new(sink, Arc::new(schema), Arc::new(props)).map_err(to_io)?;
    if !rows.is_empty() {
        let mut group = writer.next_row_group().map_err(to_io)?;
        let mut columns = table.columns().iter();
        while let Some(mut cw) = group.next_column().map_err(to_io)? {
            let col = columns.next().expect("schema and table column counts agree");
            write_column(col, rows, &mut cw).map_err(to_io)?;
            cw.close().map_err(to_io)?;
        }
        group.close().map_err(to_io)?;
    }
    writer.close().map_err(to_io)?;
    Ok(())
}

fn write_column(
    col: &Column,
    rows: &[usize],
    cw: &mut parquet::file::writer::SerializedColumnWriter<'_>,
) -> parquet::errors::Result<()> {
    match col.data() {
        ColumnData::Numerical(values) => {
            let mut def = Vec::with_capacity(rows.len());
            let mut out = Vec::with_capacity(rows.len());
            for &r in rows {
                // nan and inf are representable; only null is absent
                if col.validity()[r] == super::column::Validity::Null {
                    def.push(0);
                } else {
                    def.push(1);
                    out.push(values[r]);
                }
            }
            cw.typed::<DoubleType>().write_batch(&out, Some(&def), None)?;
        }
        ColumnData::Categorical { .. } | ColumnData::Text(_) => {
            let mut def = Vec::with_capacity(rows.len());
            let mut out = Vec::with_capacity(rows.len());
            for &r in rows {
                match col.str_value(r) {
                    Some(s) => {
                        def.push(1);
                        out.push(ByteArray::from(s));
                    }
                    None => def.push(0),
                }
            }
            cw.typed::<ByteArrayType>().write_batch(&out, Some(&def), None)?;
        }
        ColumnData::MultiCategorical { lists, dictionary } => {
            let (mut def, mut rep, mut out) = (Vec::new(), Vec::new(), Vec::new());
            for &r in rows {
                if !col.is_valid(r) {
                    def.push(0);
                    rep.push(0);
                } else if lists[r].is_empty() {
                    def.push(1);
                    rep.push(0);
                } else {
                    for (i, code) in lists[r].iter().enumerate() {
                        def.push(2);
                        rep.push(i16::from(i > 0));
                        out.push(ByteArray::from(dictionary[*code as usize].as_str()));
                    }
                }
            }
            cw.typed::<ByteArrayType>().write_batch(&out, Some(&def), Some(&rep))?;
        }
        ColumnData::Vector { .. } => {
            let (mut def, mut rep, mut out) = (Vec::new(), Vec::new(), Vec::new());
            for &r in rows {
                match col.vector_row(r) {
                    Some(v) => {
                        for (i, x) in v.iter().enumerate() {
                            def.push(2);
                            rep.push(i16::from(i > 0));
                            out.push(*x);
                        }
                    }
                    None => {
                        def.push(0);
                        rep.push(0);
                    }
                }
            }
            cw.typed::<FloatType>().write_batch(&out, Some(&def), Some(&rep))?;
        }
    }
    Ok(())
}
