class ListSwitcher {
    private ListView primaryList;
    private ListView backupList;

    private void restoreBoth(Adapter adapter) {
        primaryList.setSelection(0);
        backupList.setAdapter(adapter);
    }

    public void jumpTo(int pos) {
        if (pos < 0) {
            return;
        }
        // <start>
        list.setSelection(pos);
        // <end>
    }
}
