import streamlit as st

from libs.dataformatter import report_json


def bt_delete(key, action):
    with st.container():
        bt_delete = st.button("❌", key=f"delete_{key}", on_click=action, args=(key,))
        return bt_delete


def report_card(report):
    """ Metrics for one TestReport plus its key=value lines and JSON download."""
    with st.container(border=True):
        cols = st.columns(4)
        with cols[0]:
            st.metric("Statistic", f"{report.statistic:.4f}")
        with cols[1]:
            st.metric("p-value", f"{report.p:.4g}")
        with cols[2]:
            st.metric("Decision", "reject" if report.reject else "retain")
        with cols[3]:
            st.metric("n", report.n)
        if report.studentizer is not None:
            floored = " (floored at ε)" if report.studentizer.floored else ""
            st.caption(f"Variance estimate {report.studentizer.value:.5f}, bandwidth {report.studentizer.bandwidth}{floored}")
        st.code("\n".join(report.to_lines()), language=None)
        st.download_button("Download JSON", report_json(report), file_name=f"{report.method}_report.json",
                           mime="application/json")
